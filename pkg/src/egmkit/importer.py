"""Manual record import from JSONL or CSV files.

JSONL: one object per line; ``title`` required; ``doi``, ``abstract``,
``year``, ``authors`` (list), ``venue``, ``url`` optional. CSV: the same
column names with a header row; ``authors`` is ';'-separated.
"""

from __future__ import annotations

import csv
import io
import json

from .dedupe import MergeLogEntry, merge_into_corpus
from .errors import SchemaError
from .records import StudyRecord, build_record

CSV_COLUMNS = ("title", "doi", "abstract", "year", "authors", "venue", "url")


def parse_jsonl(text: str) -> list[StudyRecord]:
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc.msg}", line=lineno)
        if not isinstance(obj, dict):
            raise SchemaError("each line must be a JSON object", line=lineno)
        records.append(build_record(obj, source="import", line=lineno))
    return records


def parse_csv(text: str) -> list[StudyRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise SchemaError("missing header row", line=1)
    if "title" not in reader.fieldnames:
        raise SchemaError("header must include 'title'", line=1)
    records = []
    for lineno, row in enumerate(reader, start=2):
        fields = {k: v for k, v in row.items() if k in CSV_COLUMNS and v not in (None, "")}
        records.append(build_record(fields, source="import", line=lineno))
    return records


def import_records(
    path: str,
    format: str,
    existing: list[StudyRecord],
) -> tuple[list[StudyRecord], list[MergeLogEntry]]:
    """Parse, validate, and dedupe an import file against the corpus.

    Returns the genuinely new records (importing only duplicates is not an
    error; the list is simply empty) and the merge log.
    """
    if format not in ("jsonl", "csv"):
        raise ValueError(f"unknown import format {format!r}")
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    records = parse_jsonl(text) if format == "jsonl" else parse_csv(text)
    return merge_into_corpus(existing, records)

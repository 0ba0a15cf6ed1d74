"""Normalized bibliographic records and the filters applied to them."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field, asdict
from datetime import date

from .errors import SchemaError

YEAR_MIN = 1800
DOI_RE = re.compile(r"^10\.\S+$")
_DOI_PREFIX_RE = re.compile(r"^(?:https?://(?:dx\.)?doi\.org/|doi:)\s*", re.IGNORECASE)
_NON_ALNUM_RE = re.compile(r"[^a-z0-9]+")


def year_max() -> int:
    return date.today().year + 1


def normalize_doi(doi: str | None) -> str | None:
    """Lowercase, strip resolver prefixes; None when there is nothing left."""
    if not doi:
        return None
    doi = _DOI_PREFIX_RE.sub("", doi.strip()).lower()
    return doi or None


def normalize_title(title: str) -> str:
    """Lowercase with runs of non-alphanumerics collapsed to single spaces."""
    return _NON_ALNUM_RE.sub(" ", title.lower()).strip()


def make_record_id(doi: str | None, title: str, year: int | None) -> str:
    """Deterministic id: same article (by DOI, else title+year) always maps to
    the same id, so repeated searches and imports stay reproducible."""
    doi = normalize_doi(doi)
    if doi:
        key = f"doi:{doi}"
    else:
        key = f"title:{normalize_title(title)}|year:{year if year is not None else ''}"
    return "r" + hashlib.sha1(key.encode("utf-8")).hexdigest()[:12]


@dataclass
class StudyRecord:
    id: str
    title: str
    abstract: str = ""
    doi: str | None = None
    year: int | None = None
    source: str = "import"
    authors: list[str] = field(default_factory=list)
    venue: str | None = None
    url: str | None = None
    raw_provider_payload: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "StudyRecord":
        return cls(
            id=d["id"],
            title=d["title"],
            abstract=d.get("abstract") or "",
            doi=d.get("doi"),
            year=d.get("year"),
            source=d.get("source", "import"),
            authors=list(d.get("authors") or []),
            venue=d.get("venue"),
            url=d.get("url"),
            raw_provider_payload=d.get("raw_provider_payload"),
        )


def build_record(fields: dict, source: str, line: int | None = None,
                 raw_payload: str | None = None) -> StudyRecord:
    """Validate loose field data and construct a StudyRecord.

    Raises SchemaError (carrying ``line`` when given) for a missing title,
    a malformed DOI, an out-of-range year, or a non-list authors value.
    """
    title = fields.get("title")
    if not isinstance(title, str) or not title.strip():
        raise SchemaError("missing or empty 'title'", line=line)
    title = title.strip()

    doi = fields.get("doi")
    if doi is not None and not isinstance(doi, str):
        raise SchemaError("'doi' must be a string", line=line)
    doi = normalize_doi(doi)
    if doi is not None and not DOI_RE.match(doi):
        raise SchemaError(f"invalid DOI {doi!r}", line=line)

    year = fields.get("year")
    if year is not None:
        try:
            year = int(year)
        except (TypeError, ValueError):
            raise SchemaError(f"invalid year {fields.get('year')!r}", line=line)
        if not (YEAR_MIN <= year <= year_max()):
            raise SchemaError(f"year {year} outside [{YEAR_MIN}, {year_max()}]", line=line)

    authors = fields.get("authors")
    if authors is None:
        authors = []
    elif isinstance(authors, str):
        authors = [a.strip() for a in authors.split(";") if a.strip()]
    elif isinstance(authors, list):
        authors = [str(a).strip() for a in authors if str(a).strip()]
    else:
        raise SchemaError("'authors' must be a list", line=line)

    abstract = fields.get("abstract") or ""
    if not isinstance(abstract, str):
        raise SchemaError("'abstract' must be a string", line=line)

    return StudyRecord(
        id=make_record_id(doi, title, year),
        title=title,
        abstract=abstract,
        doi=doi,
        year=year,
        source=source,
        authors=authors,
        venue=fields.get("venue") or None,
        url=fields.get("url") or None,
        raw_provider_payload=raw_payload,
    )


@dataclass
class SearchFilters:
    year_min: int | None = None
    year_max: int | None = None
    languages: list[str] | None = None
    study_types: list[str] | None = None

    def __post_init__(self):
        if self.year_min is not None and self.year_max is not None \
                and self.year_min > self.year_max:
            raise ValueError(f"year_min {self.year_min} > year_max {self.year_max}")

    def matches(self, record: StudyRecord) -> bool:
        """Local year filter; a record with no year fails an active year bound.

        ``languages`` and ``study_types`` are provider-side hints / coding
        attributes and cannot be checked against a bibliographic record, so
        they do not filter here.
        """
        if self.year_min is not None:
            if record.year is None or record.year < self.year_min:
                return False
        if self.year_max is not None:
            if record.year is None or record.year > self.year_max:
                return False
        return True

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, d: dict | None) -> "SearchFilters":
        d = d or {}
        return cls(
            year_min=d.get("year_min"),
            year_max=d.get("year_max"),
            languages=d.get("languages"),
            study_types=d.get("study_types"),
        )

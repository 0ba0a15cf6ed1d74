"""Merge duplicate records fetched from multiple sources.

Two records are duplicates when their normalized DOIs are equal, or when
their normalized titles reach a Levenshtein similarity of at least
``title_threshold`` and their years differ by at most ``year_slack``.
Merging is transitive and repeated to a fixpoint, so the output never
contains a pair that still meets a merge condition.
"""

from __future__ import annotations

from dataclasses import dataclass

from .records import StudyRecord, normalize_title


def levenshtein(a: str, b: str) -> int:
    """Classic two-row edit-distance DP (insert/delete/substitute, cost 1)."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def title_similarity(a: str, b: str) -> float:
    """Normalized Levenshtein similarity of two normalized titles, in [0, 1]."""
    na, nb = normalize_title(a), normalize_title(b)
    if not na and not nb:
        return 1.0
    longest = max(len(na), len(nb))
    return 1.0 - levenshtein(na, nb) / longest


@dataclass(frozen=True)
class MergeLogEntry:
    kept_id: str
    dropped_id: str
    reason: str  # "doi" or "title"


def _years_close(a: int | None, b: int | None, slack: int) -> bool:
    # A missing year cannot contradict the title match.
    if a is None or b is None:
        return True
    return abs(a - b) <= slack


def _merge_pair_reason(a: StudyRecord, b: StudyRecord,
                       title_threshold: float, year_slack: int) -> str | None:
    if a.doi and b.doi and a.doi == b.doi:
        return "doi"
    if _years_close(a.year, b.year, year_slack) \
            and title_similarity(a.title, b.title) >= title_threshold:
        return "title"
    return None


def _merge_records(kept: StudyRecord, dropped: StudyRecord) -> StudyRecord:
    """Union metadata into the kept record: fill missing scalars, union authors."""
    kept.doi = kept.doi or dropped.doi
    kept.year = kept.year if kept.year is not None else dropped.year
    kept.venue = kept.venue or dropped.venue
    kept.url = kept.url or dropped.url
    if not kept.abstract:
        kept.abstract = dropped.abstract
    for author in dropped.authors:
        if author not in kept.authors:
            kept.authors.append(author)
    return kept


def merge_into_corpus(
    existing: list[StudyRecord],
    incoming: list[StudyRecord],
    title_threshold: float = 0.9,
    year_slack: int = 1,
) -> tuple[list[StudyRecord], list[MergeLogEntry]]:
    """Dedupe ``incoming`` records and fold duplicates of corpus records into
    the corpus. Corpus ids always survive (ids are never reused after a
    merge), but a longer incoming abstract replaces a shorter stored one.
    Returns (genuinely new records, merge log)."""
    candidates, log = dedupe(incoming, title_threshold, year_slack)
    new_records: list[StudyRecord] = []
    for rec in candidates:
        match = None
        reason = None
        for ex in existing:
            reason = _merge_pair_reason(ex, rec, title_threshold, year_slack)
            if reason:
                match = ex
                break
        if match is None:
            new_records.append(rec)
            continue
        if len(rec.abstract) > len(match.abstract):
            match.abstract = rec.abstract
        _merge_records(match, rec)
        log.append(MergeLogEntry(kept_id=match.id, dropped_id=rec.id, reason=reason))
    return new_records, log


def dedupe(
    records: list[StudyRecord],
    title_threshold: float = 0.9,
    year_slack: int = 1,
) -> tuple[list[StudyRecord], list[MergeLogEntry]]:
    """Collapse duplicates, keeping the record with the longer abstract.

    Input order is preserved for the surviving records. Idempotent:
    ``dedupe(dedupe(x)) == dedupe(x)``.
    """
    current = list(records)
    log: list[MergeLogEntry] = []

    while True:
        merged_any = False
        result: list[StudyRecord] = []
        for rec in current:
            reason = None
            match_at = -1
            for i, existing in enumerate(result):
                reason = _merge_pair_reason(existing, rec, title_threshold, year_slack)
                if reason:
                    match_at = i
                    break
            if reason is None:
                result.append(rec)
                continue
            merged_any = True
            existing = result[match_at]
            # Keep whichever side carries the longer abstract.
            if len(rec.abstract) > len(existing.abstract):
                kept, dropped = rec, existing
                result[match_at] = rec
            else:
                kept, dropped = existing, rec
            _merge_records(kept, dropped)
            log.append(MergeLogEntry(kept_id=kept.id, dropped_id=dropped.id, reason=reason))
        current = result
        if not merged_any:
            return current, log

"""Federated search: render the query per provider, page to exhaustion,
re-filter locally, and dedupe against the run and the existing corpus."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from datetime import datetime, timezone
from typing import Callable, Sequence

from .dedupe import MergeLogEntry, merge_into_corpus
from .errors import AllProvidersFailedError, EgmkitError
from .providers import ProviderConfig, fetch_provider_page
from .query import QueryExpr, eval_query, render_provider_query
from .records import SearchFilters, StudyRecord

DEFAULT_PAGE_CAP = 100


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class ProviderCounts:
    fetched: int = 0
    kept: int = 0
    failed: int = 0
    error: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SearchRun:
    id: str
    query: str
    filters: dict
    providers: list[str]
    counts: dict[str, ProviderCounts] = field(default_factory=dict)
    status: str = "pending"  # pending | running | done | failed
    truncated: bool = False
    started: str | None = None
    finished: str | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["counts"] = {name: c.to_dict() if isinstance(c, ProviderCounts) else c
                       for name, c in self.counts.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SearchRun":
        run = cls(
            id=d["id"], query=d["query"], filters=d.get("filters", {}),
            providers=list(d.get("providers", [])), status=d.get("status", "done"),
            truncated=d.get("truncated", False),
            started=d.get("started"), finished=d.get("finished"),
        )
        run.counts = {name: ProviderCounts(**c) for name, c in d.get("counts", {}).items()}
        return run


def run_search(
    query: QueryExpr,
    query_text: str,
    filters: SearchFilters,
    providers: Sequence[ProviderConfig],
    existing: Sequence[StudyRecord] = (),
    run_id: str = "run-0001",
    page_cap: int = DEFAULT_PAGE_CAP,
    fetcher: Callable = fetch_provider_page,
    progress: Callable[[float], None] | None = None,
) -> tuple[SearchRun, list[StudyRecord], list[MergeLogEntry]]:
    """Query every provider and return (run, new_records, merge_log).

    A provider failure degrades the run (logged in its counts) rather than
    aborting it; only when every provider fails does the whole search fail.
    New records are guaranteed to pass ``eval_query`` and ``filters`` and to
    not duplicate anything in ``existing``.
    """
    if not providers:
        raise AllProvidersFailedError("no providers configured")

    run = SearchRun(id=run_id, query=query_text, filters=filters.to_dict(),
                    providers=[p.name for p in providers], status="running",
                    started=_now())
    candidates: list[StudyRecord] = []

    for idx, provider in enumerate(providers):
        counts = ProviderCounts()
        run.counts[provider.name] = counts
        try:
            rendered = render_provider_query(query, provider.boolean_syntax)
            page = 1
            while True:
                records, has_more = fetcher(provider, rendered, filters, page)
                counts.fetched += len(records)
                kept = [r for r in records if eval_query(query, r) and filters.matches(r)]
                counts.kept += len(kept)
                candidates.extend(kept)
                if not has_more:
                    break
                if page >= page_cap:
                    run.truncated = True
                    break
                page += 1
        except EgmkitError as exc:
            counts.failed += 1
            counts.error = str(exc)
        if progress is not None:
            progress((idx + 1) / len(providers))

    if all(c.failed for c in run.counts.values()):
        run.status = "failed"
        run.finished = _now()
        raise AllProvidersFailedError(
            "; ".join(f"{name}: {c.error}" for name, c in run.counts.items())
        )

    new_records, log = merge_into_corpus(list(existing), candidates)

    run.status = "done"
    run.finished = _now()
    return run, new_records, log

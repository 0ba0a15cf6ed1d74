"""Single-file project state: corpus, screening, codings, model artifacts.

A project serializes to one JSON document. Saves are atomic (write to a
temp file, then rename over the target) and loads validate both the schema
version and referential integrity, so a project file is either readable
and consistent or rejected with a precise error.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

from .egm import (
    EffectCoding,
    Framework,
    GapConfig,
    ScreeningDecision,
    StudyAttributes,
    Suggestion,
    rank_suggestions,
)
from .errors import (
    DocNotIncludedError,
    IntegrityError,
    NoFrameworkError,
    NoKeywordsForTopicError,
    SchemaVersionMismatchError,
    UnknownAxisIdError,
    UnknownDocError,
)
from .dedupe import merge_into_corpus
from .keyatm import FitConfig, HyperParams, KeywordSpec, build_model_export, fit
from .records import SearchFilters, StudyRecord
from .search import SearchRun
from .textprep import (
    build_vocabulary,
    modeling_text,
    tokenize,
    validate_keywords,
    vectorize,
)

SCHEMA_VERSION = 1


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class Project:
    id: str
    name: str
    framework: Optional[Framework] = None
    query: Optional[str] = None
    search_filters: SearchFilters = field(default_factory=SearchFilters)
    keywords: dict[str, list[str]] = field(default_factory=dict)
    corpus: list[StudyRecord] = field(default_factory=list)
    screening: dict[str, ScreeningDecision] = field(default_factory=dict)
    screening_history: list[ScreeningDecision] = field(default_factory=list)
    model: Optional[dict] = None
    model_warnings: list[str] = field(default_factory=list)
    suggestions: list[Suggestion] = field(default_factory=list)
    codings: list[EffectCoding] = field(default_factory=list)
    gap_config: GapConfig = field(default_factory=GapConfig)
    search_runs: list[SearchRun] = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    # --- corpus ---

    def record_index(self) -> dict[str, StudyRecord]:
        return {r.id: r for r in self.corpus}

    def record_years(self) -> dict[str, Optional[int]]:
        return {r.id: r.year for r in self.corpus}

    def add_records(self, records: list[StudyRecord]) -> int:
        """Merge new records into the corpus, deduplicating against what is
        already there. Returns the number of genuinely new records."""
        new_records, _log = merge_into_corpus(self.corpus, records)
        self.corpus.extend(new_records)
        return len(new_records)

    # --- screening ---

    def screening_status(self, doc_id: str) -> str:
        decision = self.screening.get(doc_id)
        return decision.decision if decision else "pending"

    def included_doc_ids(self) -> set[str]:
        return {doc for doc, d in self.screening.items() if d.decision == "included"}

    def screening_queue(self, status: str = "pending") -> list[StudyRecord]:
        if status not in ("pending", "included", "excluded"):
            raise ValueError("status must be pending, included, or excluded")
        return [r for r in self.corpus if self.screening_status(r.id) == status]

    def record_screening(
        self,
        doc_id: str,
        decision: str,
        reason: Optional[str] = None,
        reviewer: str = "",
        timestamp: Optional[str] = None,
    ) -> ScreeningDecision:
        """Set the current decision for a doc, keeping the full history.

        Excluding a doc removes its pending suggestions and flags its
        codings as orphaned; re-including clears those flags.
        """
        if doc_id not in self.record_index():
            raise UnknownDocError(f"unknown document '{doc_id}'")
        current = self.screening.get(doc_id)
        if current is not None and (current.decision, current.reason,
                                    current.reviewer) == (decision, reason, reviewer):
            return current  # identical re-submission is a no-op
        entry = ScreeningDecision(doc=doc_id, decision=decision, reason=reason,
                                  reviewer=reviewer, timestamp=timestamp or _now())
        self.screening_history.append(entry)
        self.screening[doc_id] = entry
        if decision == "excluded":
            self.suggestions = [
                s for s in self.suggestions
                if not (s.doc == doc_id and s.status == "pending")
            ]
            for coding in self.codings:
                if coding.doc == doc_id:
                    coding.orphaned = True
        else:
            for coding in self.codings:
                if coding.doc == doc_id:
                    coding.orphaned = False
        return entry

    # --- coding ---

    def record_coding(
        self,
        doc_id: str,
        intervention: str,
        outcome: str,
        direction: str,
        attributes: StudyAttributes,
        reviewer: str = "",
        timestamp: Optional[str] = None,
    ) -> EffectCoding:
        """Upsert the coding for (doc, intervention, outcome)."""
        if self.framework is None:
            raise NoFrameworkError("define a framework before coding")
        if doc_id not in self.record_index():
            raise UnknownDocError(f"unknown document '{doc_id}'")
        if self.screening_status(doc_id) != "included":
            raise DocNotIncludedError(f"document '{doc_id}' is not included")
        if intervention not in self.framework.intervention_ids():
            raise UnknownAxisIdError(f"unknown intervention '{intervention}'")
        if outcome not in self.framework.outcome_ids():
            raise UnknownAxisIdError(f"unknown outcome '{outcome}'")
        coding = EffectCoding(doc=doc_id, intervention=intervention, outcome=outcome,
                              direction=direction, attributes=attributes,
                              reviewer=reviewer, timestamp=timestamp or _now())
        for i, existing in enumerate(self.codings):
            if existing.key() == coding.key():
                self.codings[i] = coding
                return coding
        self.codings.append(coding)
        return coding

    # --- suggestions ---

    def get_suggestion(self, suggestion_id: str) -> Optional[Suggestion]:
        for s in self.suggestions:
            if s.id == suggestion_id:
                return s
        return None

    def set_suggestion_status(self, suggestion_id: str, status: str) -> Suggestion:
        if status not in ("confirmed", "rejected"):
            raise ValueError("status must be 'confirmed' or 'rejected'")
        suggestion = self.get_suggestion(suggestion_id)
        if suggestion is None:
            raise KeyError(suggestion_id)
        suggestion.status = status
        return suggestion

    def suggestions_for(self, topic: str, tau: float = 0.2) -> list[Suggestion]:
        """Stored suggestions for one topic at or above the threshold,
        re-ranked the same way they were generated."""
        if self.model is None:
            return []
        if topic not in self.keyword_topic_labels():
            from .errors import UnknownTopicError
            raise UnknownTopicError(f"unknown topic '{topic}'")
        picked = [s for s in self.suggestions
                  if s.topic == topic and s.probability >= tau]
        picked.sort(key=lambda s: (-s.probability, s.doc))
        return picked

    def keyword_topic_labels(self) -> list[str]:
        if self.model is None:
            return []
        spec = self.model["spec"]
        return [label for label, indices
                in zip(spec["topic_labels"], spec["keyword_indices"]) if indices]

    def refresh_suggestions(self) -> None:
        """Regenerate pending suggestions from the current model for every
        keyword topic, over all included docs (threshold applied at read)."""
        if self.model is None:
            self.suggestions = []
            return
        theta = self.model["theta"]
        doc_ids = self.model["doc_ids"]
        labels = self.model["spec"]["topic_labels"]
        included = self.included_doc_ids()
        fresh: list[Suggestion] = []
        for label in self.keyword_topic_labels():
            fresh.extend(rank_suggestions(theta, doc_ids, labels, label,
                                          included, tau=0.0))
        self.suggestions = fresh

    # --- model fitting ---

    def fit_model(
        self,
        sweeps: int = 1500,
        burn_in: int = 500,
        seed: int = 0,
        chains: int = 1,
        min_df: int = 2,
        max_df_ratio: float = 0.95,
        extra_background: int = 1,
        progress: Optional[Callable] = None,
    ) -> dict:
        """Tokenize the included docs, fit the keyword topic model, store
        the export, and regenerate suggestions."""
        if not self.keywords:
            raise NoKeywordsForTopicError("no keyword topics defined")
        included = [r for r in self.corpus
                    if self.screening_status(r.id) == "included"]
        docs = [(r.id, tokenize(modeling_text(r.title, r.abstract)))
                for r in included]
        forced: list[str] = []
        for words in self.keywords.values():
            for raw in words:
                tokens = tokenize(raw)
                if len(tokens) == 1:
                    forced.append(tokens[0])
        vocab = build_vocabulary([tokens for _, tokens in docs],
                                 min_df=min_df, max_df_ratio=max_df_ratio,
                                 forced_words=forced)
        report = validate_keywords(self.keywords, vocab)
        corpus_t = vectorize(docs, vocab)
        spec = KeywordSpec.from_words(report.resolved(), vocab,
                                      extra_background=extra_background)
        hyper = HyperParams.defaults(spec.n_topics)
        config = FitConfig(sweeps=sweeps, burn_in=burn_in, seed=seed, chains=chains)
        result = fit(corpus_t, spec, hyper=hyper, config=config, progress=progress)
        self.model = build_model_export(result, vocab, corpus_t.doc_ids)
        self.model_warnings = list(report.warnings)
        if corpus_t.excluded_ids:
            self.model_warnings.append(
                "docs with no in-vocabulary tokens were left out of the model: "
                + ", ".join(corpus_t.excluded_ids)
            )
        self.refresh_suggestions()
        return self.model

    # --- methodology ---

    def methodology_note(self) -> dict:
        """Deterministic provenance summary embedded in EGM exports."""
        runs = []
        for run in self.search_runs:
            d = run.to_dict()
            d.pop("started", None)
            d.pop("finished", None)
            runs.append(d)
        model_cfg = None
        if self.model is not None:
            model_cfg = {
                "config": self.model["config"],
                "hyper": self.model["hyper"],
                "topic_labels": self.model["spec"]["topic_labels"],
                "n_words": self.model["spec"]["n_words"],
            }
        return {
            "query": self.query,
            "search_filters": self.search_filters.to_dict(),
            "search_runs": runs,
            "keywords": self.keywords,
            "model": model_cfg,
            "gap_config": self.gap_config.to_dict(),
            "n_corpus": len(self.corpus),
            "n_included": len(self.included_doc_ids()),
        }

    # --- serialization ---

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "id": self.id,
            "name": self.name,
            "framework": self.framework.to_dict() if self.framework else None,
            "criteria": {
                "query": self.query,
                "filters": self.search_filters.to_dict(),
            },
            "keywords": self.keywords,
            "corpus": [r.to_dict() for r in self.corpus],
            "screening": {
                "current": {doc: d.to_dict() for doc, d in self.screening.items()},
                "history": [d.to_dict() for d in self.screening_history],
            },
            "model": self.model,
            "model_warnings": self.model_warnings,
            "suggestions": [s.to_dict() for s in self.suggestions],
            "codings": [c.to_dict() for c in self.codings],
            "gap_config": self.gap_config.to_dict(),
            "search_runs": [r.to_dict() for r in self.search_runs],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Project":
        version = d.get("schema_version")
        if version != SCHEMA_VERSION:
            raise SchemaVersionMismatchError(
                f"project schema version {version!r} is not supported "
                f"(this build reads version {SCHEMA_VERSION})"
            )
        criteria = d.get("criteria") or {}
        screening = d.get("screening") or {}
        project = cls(
            id=d["id"],
            name=d.get("name", d["id"]),
            framework=Framework.from_dict(d["framework"]) if d.get("framework") else None,
            query=criteria.get("query"),
            search_filters=SearchFilters.from_dict(criteria.get("filters")),
            keywords={k: list(v) for k, v in (d.get("keywords") or {}).items()},
            corpus=[StudyRecord.from_dict(r) for r in d.get("corpus", [])],
            screening={doc: ScreeningDecision.from_dict(s)
                       for doc, s in screening.get("current", {}).items()},
            screening_history=[ScreeningDecision.from_dict(s)
                               for s in screening.get("history", [])],
            model=d.get("model"),
            model_warnings=list(d.get("model_warnings", [])),
            suggestions=[Suggestion.from_dict(s) for s in d.get("suggestions", [])],
            codings=[EffectCoding.from_dict(c) for c in d.get("codings", [])],
            gap_config=GapConfig.from_dict(d.get("gap_config")),
            search_runs=[SearchRun.from_dict(r) for r in d.get("search_runs", [])],
            schema_version=version,
        )
        problems = project.integrity_problems()
        if problems:
            raise IntegrityError(problems)
        return project

    def integrity_problems(self) -> list[str]:
        """Referential integrity check: every stored reference must resolve."""
        problems: list[str] = []
        ids = set(self.record_index())
        for doc in self.screening:
            if doc not in ids:
                problems.append(f"screening decision references unknown doc '{doc}'")
        for entry in self.screening_history:
            if entry.doc not in ids:
                problems.append(
                    f"screening history references unknown doc '{entry.doc}'")
        for s in self.suggestions:
            if s.doc not in ids:
                problems.append(f"suggestion '{s.id}' references unknown doc '{s.doc}'")
        interventions = set(self.framework.intervention_ids()) if self.framework else set()
        outcomes = set(self.framework.outcome_ids()) if self.framework else set()
        seen_keys: set[tuple[str, str, str]] = set()
        for c in self.codings:
            if c.doc not in ids:
                problems.append(f"coding references unknown doc '{c.doc}'")
            if self.framework is None:
                problems.append(
                    f"coding for doc '{c.doc}' exists but no framework is defined")
            else:
                if c.intervention not in interventions:
                    problems.append(
                        f"coding references unknown intervention '{c.intervention}'")
                if c.outcome not in outcomes:
                    problems.append(f"coding references unknown outcome '{c.outcome}'")
            if c.key() in seen_keys:
                problems.append(
                    f"duplicate coding for {c.key()}")
            seen_keys.add(c.key())
        return problems

    # --- persistence ---

    def save(self, path: str | Path) -> None:
        """Atomic save: a crash mid-write never corrupts an existing file."""
        path = Path(path)
        payload = json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.",
                                        suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(payload)
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(tmp_name, path)
        except BaseException:
            try:
                os.unlink(tmp_name)
            except OSError:
                pass
            raise

    @classmethod
    def load(cls, path: str | Path) -> "Project":
        with open(path, encoding="utf-8") as handle:
            return cls.from_dict(json.load(handle))


def new_project(project_id: str, name: str) -> Project:
    return Project(id=project_id, name=name)

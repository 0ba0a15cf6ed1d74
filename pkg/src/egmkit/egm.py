"""Evidence gap map domain model.

The framework fixes the two axes (interventions and outcomes); reviewers
screen documents, confirm model suggestions, and code effect directions.
Cell tallies over those codings, classified against configurable
thresholds, make up the exported matrix.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date
from typing import Optional, Sequence

from .errors import NoFrameworkError, UnknownTopicError

STUDY_TYPES = ("impact_evaluation", "systematic_review", "other_primary")
DIRECTIONS = ("positive", "negative", "non_significant")
STUDY_STATUSES = ("completed", "ongoing")
QUALITY_RATINGS = ("low", "medium", "high")
GAP_CLASSES = ("absolute_gap", "synthesis_gap", "populated")

_ISO3_RE = re.compile(r"^[A-Za-z]{3}$")


@dataclass(frozen=True)
class AxisItem:
    id: str
    label: str
    description: str = ""

    def to_dict(self) -> dict:
        return {"id": self.id, "label": self.label, "description": self.description}

    @classmethod
    def from_dict(cls, d: dict) -> "AxisItem":
        return cls(id=d["id"], label=d.get("label", d["id"]),
                   description=d.get("description", ""))


@dataclass(frozen=True)
class Framework:
    """The two EGM axes plus which one the topic model's keyword topics
    stand for (the other axis is picked manually while coding)."""

    interventions: tuple[AxisItem, ...]
    outcomes: tuple[AxisItem, ...]
    topic_axis: str = "interventions"

    def __post_init__(self):
        if not self.interventions or not self.outcomes:
            raise ValueError("both axes must be non-empty")
        for axis_name, items in (("interventions", self.interventions),
                                 ("outcomes", self.outcomes)):
            ids = [item.id for item in items]
            if len(set(ids)) != len(ids):
                raise ValueError(f"duplicate ids on the {axis_name} axis")
        if self.topic_axis not in ("interventions", "outcomes"):
            raise ValueError("topic_axis must be 'interventions' or 'outcomes'")

    def intervention_ids(self) -> list[str]:
        return [item.id for item in self.interventions]

    def outcome_ids(self) -> list[str]:
        return [item.id for item in self.outcomes]

    def to_dict(self) -> dict:
        return {
            "interventions": [i.to_dict() for i in self.interventions],
            "outcomes": [o.to_dict() for o in self.outcomes],
            "topic_axis": self.topic_axis,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Framework":
        return cls(
            interventions=tuple(AxisItem.from_dict(i) for i in d["interventions"]),
            outcomes=tuple(AxisItem.from_dict(o) for o in d["outcomes"]),
            topic_axis=d.get("topic_axis", "interventions"),
        )


@dataclass
class StudyAttributes:
    study_type: str
    geography: Optional[str] = None
    population: Optional[str] = None
    status: Optional[str] = None
    quality_rating: Optional[str] = None

    def __post_init__(self):
        if self.study_type not in STUDY_TYPES:
            raise ValueError(f"study_type must be one of {STUDY_TYPES}")
        if self.geography is not None:
            if not _ISO3_RE.match(self.geography):
                raise ValueError("geography must be an ISO-3166 alpha-3 code")
            self.geography = self.geography.upper()
        if self.status is not None and self.status not in STUDY_STATUSES:
            raise ValueError(f"status must be one of {STUDY_STATUSES}")
        if self.quality_rating is not None and self.quality_rating not in QUALITY_RATINGS:
            raise ValueError(f"quality_rating must be one of {QUALITY_RATINGS}")

    def to_dict(self) -> dict:
        return {
            "study_type": self.study_type,
            "geography": self.geography,
            "population": self.population,
            "status": self.status,
            "quality_rating": self.quality_rating,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StudyAttributes":
        return cls(
            study_type=d["study_type"],
            geography=d.get("geography"),
            population=d.get("population"),
            status=d.get("status"),
            quality_rating=d.get("quality_rating"),
        )


@dataclass
class ScreeningDecision:
    doc: str
    decision: str  # "included" or "excluded"
    reason: Optional[str] = None
    reviewer: str = ""
    timestamp: str = ""

    def __post_init__(self):
        if self.decision not in ("included", "excluded"):
            raise ValueError("decision must be 'included' or 'excluded'")

    def to_dict(self) -> dict:
        return {"doc": self.doc, "decision": self.decision, "reason": self.reason,
                "reviewer": self.reviewer, "timestamp": self.timestamp}

    @classmethod
    def from_dict(cls, d: dict) -> "ScreeningDecision":
        return cls(doc=d["doc"], decision=d["decision"], reason=d.get("reason"),
                   reviewer=d.get("reviewer", ""), timestamp=d.get("timestamp", ""))


@dataclass
class Suggestion:
    id: str
    doc: str
    topic: str
    probability: float
    status: str = "pending"

    def __post_init__(self):
        if not (0.0 <= self.probability <= 1.0):
            raise ValueError("probability must be within [0, 1]")
        if self.status not in ("pending", "confirmed", "rejected"):
            raise ValueError("status must be pending, confirmed, or rejected")

    def to_dict(self) -> dict:
        return {"id": self.id, "doc": self.doc, "topic": self.topic,
                "probability": self.probability, "status": self.status}

    @classmethod
    def from_dict(cls, d: dict) -> "Suggestion":
        return cls(id=d["id"], doc=d["doc"], topic=d["topic"],
                   probability=d["probability"], status=d.get("status", "pending"))


@dataclass
class EffectCoding:
    doc: str
    intervention: str
    outcome: str
    direction: str
    attributes: StudyAttributes
    reviewer: str = ""
    timestamp: str = ""
    orphaned: bool = False  # doc was excluded after this coding was stored

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")

    def key(self) -> tuple[str, str, str]:
        return (self.doc, self.intervention, self.outcome)

    def to_dict(self) -> dict:
        return {
            "doc": self.doc, "intervention": self.intervention,
            "outcome": self.outcome, "direction": self.direction,
            "attributes": self.attributes.to_dict(),
            "reviewer": self.reviewer, "timestamp": self.timestamp,
            "orphaned": self.orphaned,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EffectCoding":
        return cls(
            doc=d["doc"], intervention=d["intervention"], outcome=d["outcome"],
            direction=d["direction"],
            attributes=StudyAttributes.from_dict(d["attributes"]),
            reviewer=d.get("reviewer", ""), timestamp=d.get("timestamp", ""),
            orphaned=d.get("orphaned", False),
        )


@dataclass
class GapConfig:
    """Thresholds for gap classification.

    A cell is an absolute gap when primary evidence is scarce and no recent
    systematic review exists; a synthesis gap when primary studies have
    accumulated without a recent review. "Recent" means within
    ``sr_recency_years`` of ``reference_year``.
    """

    absolute_max: int = 1
    synthesis_min: int = 2
    sr_recency_years: int = 5
    reference_year: int = field(default_factory=lambda: date.today().year)

    def __post_init__(self):
        values = (self.absolute_max, self.synthesis_min,
                  self.sr_recency_years, self.reference_year)
        if any(v < 0 for v in values):
            raise ValueError("gap thresholds must be non-negative")
        if self.absolute_max >= self.synthesis_min:
            raise ValueError("absolute_max must be below synthesis_min")

    @property
    def sr_cutoff_year(self) -> int:
        return self.reference_year - self.sr_recency_years

    def to_dict(self) -> dict:
        return {"absolute_max": self.absolute_max, "synthesis_min": self.synthesis_min,
                "sr_recency_years": self.sr_recency_years,
                "reference_year": self.reference_year}

    @classmethod
    def from_dict(cls, d: dict | None) -> "GapConfig":
        d = d or {}
        return cls(**{k: d[k] for k in ("absolute_max", "synthesis_min",
                                        "sr_recency_years", "reference_year") if k in d})


@dataclass
class EgmFilters:
    """Attribute filters applied to codings before tallying."""

    geography: Optional[str] = None
    study_type: Optional[str] = None
    population: Optional[str] = None
    quality: Optional[str] = None

    def matches(self, attributes: StudyAttributes) -> bool:
        if self.geography is not None:
            if attributes.geography != self.geography.upper():
                return False
        if self.study_type is not None:
            if attributes.study_type != self.study_type:
                return False
        if self.population is not None:
            hay = (attributes.population or "").lower()
            if self.population.lower() not in hay:
                return False
        if self.quality is not None:
            if attributes.quality_rating != self.quality:
                return False
        return True

    def to_dict(self) -> dict:
        out = {}
        for name in ("geography", "study_type", "population", "quality"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out

    @classmethod
    def from_dict(cls, d: dict | None) -> "EgmFilters":
        d = d or {}
        return cls(geography=d.get("geography"), study_type=d.get("study_type"),
                   population=d.get("population"), quality=d.get("quality"))


@dataclass
class EgmCell:
    intervention: str
    outcome: str
    n_impact_evaluations: int = 0
    n_systematic_reviews: int = 0
    n_other_primary: int = 0
    n_positive: int = 0
    n_negative: int = 0
    n_non_significant: int = 0
    newest_sr_year: Optional[int] = None
    gap_class: str = "absolute_gap"
    studies: list[dict] = field(default_factory=list)

    @property
    def total(self) -> int:
        return self.n_impact_evaluations + self.n_systematic_reviews + self.n_other_primary

    def to_dict(self) -> dict:
        return {
            "intervention": self.intervention, "outcome": self.outcome,
            "n_impact_evaluations": self.n_impact_evaluations,
            "n_systematic_reviews": self.n_systematic_reviews,
            "n_other_primary": self.n_other_primary,
            "n_positive": self.n_positive, "n_negative": self.n_negative,
            "n_non_significant": self.n_non_significant,
            "newest_sr_year": self.newest_sr_year,
            "gap_class": self.gap_class,
            "total": self.total,
            "studies": list(self.studies),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EgmCell":
        return cls(
            intervention=d["intervention"], outcome=d["outcome"],
            n_impact_evaluations=d.get("n_impact_evaluations", 0),
            n_systematic_reviews=d.get("n_systematic_reviews", 0),
            n_other_primary=d.get("n_other_primary", 0),
            n_positive=d.get("n_positive", 0), n_negative=d.get("n_negative", 0),
            n_non_significant=d.get("n_non_significant", 0),
            newest_sr_year=d.get("newest_sr_year"),
            gap_class=d.get("gap_class", "absolute_gap"),
            studies=list(d.get("studies", [])),
        )


@dataclass
class EgmMatrix:
    interventions: list[AxisItem]
    outcomes: list[AxisItem]
    cells: list[EgmCell]  # row-major: interventions x outcomes
    gap_config: GapConfig
    filters: EgmFilters = field(default_factory=EgmFilters)
    methodology: dict = field(default_factory=dict)

    def cell(self, intervention: str, outcome: str) -> EgmCell:
        width = len(self.outcomes)
        row = [i.id for i in self.interventions].index(intervention)
        col = [o.id for o in self.outcomes].index(outcome)
        return self.cells[row * width + col]

    def to_dict(self) -> dict:
        return {
            "interventions": [i.to_dict() for i in self.interventions],
            "outcomes": [o.to_dict() for o in self.outcomes],
            "cells": [c.to_dict() for c in self.cells],
            "gap_config": self.gap_config.to_dict(),
            "filters": self.filters.to_dict(),
            "methodology": self.methodology,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EgmMatrix":
        return cls(
            interventions=[AxisItem.from_dict(i) for i in d["interventions"]],
            outcomes=[AxisItem.from_dict(o) for o in d["outcomes"]],
            cells=[EgmCell.from_dict(c) for c in d["cells"]],
            gap_config=GapConfig.from_dict(d.get("gap_config")),
            filters=EgmFilters.from_dict(d.get("filters")),
            methodology=d.get("methodology", {}),
        )


def classify_cell(cell: EgmCell, cfg: GapConfig) -> str:
    """Total classification over cell counts; order of tallying is
    irrelevant because only aggregate counts enter.

    P counts primary evidence (impact evaluations plus other primary
    studies); a recent systematic review is one from the configured recency
    window. Reviews without a year never count as recent.
    """
    primary = cell.n_impact_evaluations + cell.n_other_primary
    has_recent_sr = (
        cell.n_systematic_reviews > 0
        and cell.newest_sr_year is not None
        and cell.newest_sr_year >= cfg.sr_cutoff_year
    )
    if primary <= cfg.absolute_max and not has_recent_sr:
        return "absolute_gap"
    if primary >= cfg.synthesis_min and not has_recent_sr:
        return "synthesis_gap"
    return "populated"


def build_egm(project, filters: EgmFilters | None = None) -> EgmMatrix:
    """Tally codings of currently included docs into one cell per
    intervention x outcome pair and classify every cell.

    ``project`` supplies framework, codings, record years, the set of
    included doc ids, gap config, and the methodology note. Deterministic:
    cells are row-major and per-cell study lists are sorted by doc id.
    """
    framework: Framework | None = project.framework
    if framework is None:
        raise NoFrameworkError("the project has no framework defined")
    filters = filters or EgmFilters()
    cfg: GapConfig = project.gap_config
    included = project.included_doc_ids()
    years = project.record_years()

    by_pair: dict[tuple[str, str], list[EffectCoding]] = {}
    for coding in project.codings:
        if coding.doc not in included:
            continue
        if not filters.matches(coding.attributes):
            continue
        by_pair.setdefault((coding.intervention, coding.outcome), []).append(coding)

    cells: list[EgmCell] = []
    for intervention in framework.interventions:
        for outcome in framework.outcomes:
            cell = EgmCell(intervention=intervention.id, outcome=outcome.id)
            group = sorted(by_pair.get((intervention.id, outcome.id), []),
                           key=lambda c: c.doc)
            for coding in group:
                st = coding.attributes.study_type
                if st == "impact_evaluation":
                    cell.n_impact_evaluations += 1
                elif st == "systematic_review":
                    cell.n_systematic_reviews += 1
                    year = years.get(coding.doc)
                    if year is not None and (cell.newest_sr_year is None
                                             or year > cell.newest_sr_year):
                        cell.newest_sr_year = year
                else:
                    cell.n_other_primary += 1
                if coding.direction == "positive":
                    cell.n_positive += 1
                elif coding.direction == "negative":
                    cell.n_negative += 1
                else:
                    cell.n_non_significant += 1
                cell.studies.append({
                    "doc": coding.doc,
                    "direction": coding.direction,
                    "study_type": st,
                    "year": years.get(coding.doc),
                    "quality_rating": coding.attributes.quality_rating,
                })
            cell.gap_class = classify_cell(cell, cfg)
            cells.append(cell)

    return EgmMatrix(
        interventions=list(framework.interventions),
        outcomes=list(framework.outcomes),
        cells=cells,
        gap_config=cfg,
        filters=filters,
        methodology=project.methodology_note(),
    )


def rank_suggestions(
    theta: Sequence[Sequence[float]],
    doc_ids: Sequence[str],
    topic_labels: Sequence[str],
    topic: str,
    included_ids: set[str],
    tau: float = 0.2,
) -> list[Suggestion]:
    """Included docs whose probability for ``topic`` reaches ``tau``,
    descending by probability with ties broken by doc id."""
    if topic not in topic_labels:
        raise UnknownTopicError(f"unknown topic '{topic}'")
    k = list(topic_labels).index(topic)
    picked = [
        (float(row[k]), doc)
        for doc, row in zip(doc_ids, theta)
        if doc in included_ids and float(row[k]) >= tau
    ]
    picked.sort(key=lambda pair: (-pair[0], pair[1]))
    return [
        Suggestion(id=f"s-{doc}-{topic}", doc=doc, topic=topic, probability=prob)
        for prob, doc in picked
    ]

"""Gap-map domain model: frameworks, attributes, classification, tallying."""

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from egmkit.egm import (
    AxisItem,
    EffectCoding,
    EgmCell,
    EgmFilters,
    EgmMatrix,
    Framework,
    GapConfig,
    ScreeningDecision,
    StudyAttributes,
    Suggestion,
    build_egm,
    classify_cell,
    rank_suggestions,
)
from egmkit.errors import NoFrameworkError, UnknownTopicError
from egmkit.project import Project
from egmkit.records import StudyRecord


def axis(*ids):
    return tuple(AxisItem(id=i, label=i.replace("_", " ").title()) for i in ids)


def make_framework():
    return Framework(interventions=axis("cash", "feeding"),
                     outcomes=axis("attendance", "nutrition"))


# --- framework ---

def test_framework_requires_nonempty_axes():
    with pytest.raises(ValueError):
        Framework(interventions=(), outcomes=axis("o1"))
    with pytest.raises(ValueError):
        Framework(interventions=axis("i1"), outcomes=())


def test_framework_rejects_duplicate_axis_ids():
    with pytest.raises(ValueError, match="duplicate"):
        Framework(interventions=axis("a", "a"), outcomes=axis("o1"))


def test_framework_topic_axis_choices():
    fw = Framework(interventions=axis("a"), outcomes=axis("b"),
                   topic_axis="outcomes")
    assert fw.topic_axis == "outcomes"
    with pytest.raises(ValueError):
        Framework(interventions=axis("a"), outcomes=axis("b"), topic_axis="rows")


def test_framework_round_trip():
    fw = make_framework()
    assert Framework.from_dict(fw.to_dict()) == fw


# --- attributes and codings ---

def test_attributes_validate_enums():
    attrs = StudyAttributes(study_type="impact_evaluation", geography="ken",
                            quality_rating="high", status="completed")
    assert attrs.geography == "KEN"  # normalized to upper case
    with pytest.raises(ValueError):
        StudyAttributes(study_type="rct")
    with pytest.raises(ValueError):
        StudyAttributes(study_type="impact_evaluation", geography="Kenya")
    with pytest.raises(ValueError):
        StudyAttributes(study_type="impact_evaluation", quality_rating="great")
    with pytest.raises(ValueError):
        StudyAttributes(study_type="impact_evaluation", status="paused")


def test_coding_validates_direction():
    attrs = StudyAttributes(study_type="impact_evaluation")
    with pytest.raises(ValueError):
        EffectCoding(doc="d1", intervention="a", outcome="b",
                     direction="upward", attributes=attrs)


def test_screening_decision_validates():
    with pytest.raises(ValueError):
        ScreeningDecision(doc="d1", decision="maybe")


def test_suggestion_validates():
    with pytest.raises(ValueError):
        Suggestion(id="s1", doc="d", topic="t", probability=1.5)
    with pytest.raises(ValueError):
        Suggestion(id="s1", doc="d", topic="t", probability=0.5, status="open")


# --- gap config ---

def test_gap_config_defaults():
    cfg = GapConfig(reference_year=2025)
    assert (cfg.absolute_max, cfg.synthesis_min, cfg.sr_recency_years) == (1, 2, 5)
    assert cfg.sr_cutoff_year == 2020


def test_gap_config_invariants():
    with pytest.raises(ValueError):
        GapConfig(absolute_max=3, synthesis_min=2)
    with pytest.raises(ValueError):
        GapConfig(absolute_max=2, synthesis_min=2)
    with pytest.raises(ValueError):
        GapConfig(sr_recency_years=-1)


# --- classify_cell truth table ---

CFG = GapConfig(absolute_max=1, synthesis_min=2, sr_recency_years=5,
                reference_year=2025)


def cell(n_impact=0, n_sr=0, n_other=0, sr_year=None):
    return EgmCell(intervention="i", outcome="o",
                   n_impact_evaluations=n_impact, n_systematic_reviews=n_sr,
                   n_other_primary=n_other, newest_sr_year=sr_year)


def test_no_primary_no_reviews_is_absolute_gap():
    assert classify_cell(cell(), CFG) == "absolute_gap"


def test_many_primary_without_recent_review_is_synthesis_gap():
    # Four primary studies, no systematic review at all.
    assert classify_cell(cell(n_impact=3, n_other=1), CFG) == "synthesis_gap"
    # Same but the only review predates the recency window.
    stale = cell(n_impact=3, n_other=1, n_sr=1, sr_year=2015)
    assert classify_cell(stale, CFG) == "synthesis_gap"


def test_many_primary_with_recent_review_is_populated():
    recent = cell(n_impact=4, n_sr=1, sr_year=2023)
    assert classify_cell(recent, CFG) == "populated"


def test_boundary_cases():
    # P exactly at absolute_max stays an absolute gap.
    assert classify_cell(cell(n_impact=1), CFG) == "absolute_gap"
    # P exactly at synthesis_min becomes a synthesis gap.
    assert classify_cell(cell(n_impact=2), CFG) == "synthesis_gap"
    # An SR exactly at the cutoff year counts as recent.
    assert classify_cell(cell(n_impact=2, n_sr=1, sr_year=2020), CFG) == "populated"
    assert classify_cell(cell(n_impact=2, n_sr=1, sr_year=2019), CFG) == "synthesis_gap"
    # A recent SR over a near-empty cell is populated, not a gap.
    assert classify_cell(cell(n_sr=1, sr_year=2024), CFG) == "populated"
    # An SR without a year can never count as recent.
    assert classify_cell(cell(n_impact=2, n_sr=1, sr_year=None), CFG) == "synthesis_gap"


def test_wider_populated_band_with_custom_thresholds():
    cfg = GapConfig(absolute_max=1, synthesis_min=5, reference_year=2025)
    assert classify_cell(cell(n_impact=3), cfg) == "populated"


# --- permutation invariance ---

DIRECTIONS = ["positive", "negative", "non_significant"]
TYPES = ["impact_evaluation", "systematic_review", "other_primary"]


def project_with(codings_spec, years=None):
    """Small two-by-two project; codings_spec is (doc, i, o, direction, type)."""
    years = years or {}
    docs = sorted({c[0] for c in codings_spec})
    project = Project(id="p", name="p", framework=make_framework(),
                      gap_config=CFG)
    for doc in docs:
        project.corpus.append(StudyRecord(id=doc, title=f"study {doc}",
                                          year=years.get(doc)))
        project.record_screening(doc, "included")
    for doc, i, o, direction, st_ in codings_spec:
        project.record_coding(doc, i, o, direction,
                              StudyAttributes(study_type=st_))
    return project


@given(st.randoms(use_true_random=False), st.lists(
    st.tuples(st.sampled_from(TYPES), st.sampled_from(DIRECTIONS)),
    min_size=0, max_size=8))
def test_classification_is_permutation_invariant(rnd, rows):
    codings = [(f"d{i}", "cash", "attendance", direction, st_)
               for i, (st_, direction) in enumerate(rows)]
    years = {f"d{i}": 2010 + i for i in range(len(rows))}
    baseline = build_egm(project_with(codings, years)).cell("cash", "attendance")
    shuffled = list(codings)
    rnd.shuffle(shuffled)
    other = build_egm(project_with(shuffled, years)).cell("cash", "attendance")
    assert other.gap_class == baseline.gap_class
    assert other.to_dict() == baseline.to_dict()


# --- build_egm ---

def test_empty_project_is_all_absolute_gaps():
    project = Project(id="p", name="p", framework=make_framework(), gap_config=CFG)
    matrix = build_egm(project)
    assert len(matrix.cells) == 4
    assert all(c.gap_class == "absolute_gap" and c.total == 0 for c in matrix.cells)


def test_build_egm_requires_framework():
    with pytest.raises(NoFrameworkError):
        build_egm(Project(id="p", name="p"))


def test_hand_tallied_fixture():
    # Three codings in one cell: 1 impact evaluation (positive, 2019),
    # 1 recent SR (non_significant, 2023), 1 other primary (negative, 2012);
    # plus one coding in a second cell.
    codings = [
        ("d1", "cash", "attendance", "positive", "impact_evaluation"),
        ("d2", "cash", "attendance", "non_significant", "systematic_review"),
        ("d3", "cash", "attendance", "negative", "other_primary"),
        ("d4", "feeding", "nutrition", "positive", "impact_evaluation"),
    ]
    years = {"d1": 2019, "d2": 2023, "d3": 2012, "d4": 2021}
    matrix = build_egm(project_with(codings, years))

    c = matrix.cell("cash", "attendance")
    assert (c.n_impact_evaluations, c.n_systematic_reviews, c.n_other_primary) == (1, 1, 1)
    assert (c.n_positive, c.n_negative, c.n_non_significant) == (1, 1, 1)
    assert c.newest_sr_year == 2023
    assert c.total == 3
    assert c.gap_class == "populated"  # P=2, recent SR present

    d = matrix.cell("feeding", "nutrition")
    assert d.total == 1 and d.gap_class == "absolute_gap"
    assert matrix.cell("cash", "nutrition").total == 0
    # Direction tallies always equal study-type tallies per cell.
    for cc in matrix.cells:
        assert cc.n_positive + cc.n_negative + cc.n_non_significant == cc.total


def test_tally_conservation():
    codings = [(f"d{i}", "cash", random.Random(i).choice(["attendance", "nutrition"]),
                DIRECTIONS[i % 3], TYPES[i % 3]) for i in range(9)]
    project = project_with(codings)
    matrix = build_egm(project)
    assert sum(c.total for c in matrix.cells) == len(project.codings)


def test_excluded_doc_codings_leave_the_tally():
    project = project_with([
        ("d1", "cash", "attendance", "positive", "impact_evaluation"),
        ("d2", "cash", "attendance", "positive", "impact_evaluation"),
    ])
    project.record_screening("d1", "excluded", reason="out of scope")
    matrix = build_egm(project)
    assert matrix.cell("cash", "attendance").total == 1
    assert [c for c in project.codings if c.doc == "d1"][0].orphaned


def test_newest_sr_year_ignores_missing_years():
    codings = [
        ("d1", "cash", "attendance", "positive", "systematic_review"),
        ("d2", "cash", "attendance", "positive", "systematic_review"),
    ]
    matrix = build_egm(project_with(codings, years={"d1": 2018}))  # d2 has no year
    assert matrix.cell("cash", "attendance").newest_sr_year == 2018


# --- filters ---

def coded_project():
    project = Project(id="p", name="p", framework=make_framework(), gap_config=CFG)
    rows = [
        ("d1", "KEN", "impact_evaluation", "children", "high"),
        ("d2", "GHA", "impact_evaluation", "adults", "low"),
        ("d3", "KEN", "systematic_review", "children", None),
    ]
    for doc, geo, st_, pop, quality in rows:
        project.corpus.append(StudyRecord(id=doc, title=f"study {doc}", year=2022))
        project.record_screening(doc, "included")
        project.record_coding(doc, "cash", "attendance", "positive",
                              StudyAttributes(study_type=st_, geography=geo,
                                              population=pop, quality_rating=quality))
    return project


def test_geography_filter():
    matrix = build_egm(coded_project(), EgmFilters(geography="ken"))
    assert matrix.cell("cash", "attendance").total == 2


def test_study_type_filter():
    matrix = build_egm(coded_project(), EgmFilters(study_type="systematic_review"))
    assert matrix.cell("cash", "attendance").total == 1


def test_population_filter_is_substring_match():
    matrix = build_egm(coded_project(), EgmFilters(population="child"))
    assert matrix.cell("cash", "attendance").total == 2


def test_quality_filter():
    matrix = build_egm(coded_project(), EgmFilters(quality="high"))
    assert matrix.cell("cash", "attendance").total == 1


def test_filter_excluding_everything_reduces_to_empty_case():
    matrix = build_egm(coded_project(), EgmFilters(geography="PER"))
    assert all(c.total == 0 and c.gap_class == "absolute_gap" for c in matrix.cells)


def test_matrix_round_trip():
    matrix = build_egm(coded_project())
    assert EgmMatrix.from_dict(matrix.to_dict()) == matrix


# --- rank_suggestions ---

THETA = [
    [0.7, 0.2, 0.1],
    [0.3, 0.5, 0.2],
    [0.7, 0.1, 0.2],
    [0.05, 0.9, 0.05],
]
DOCS = ["d1", "d2", "d3", "d4"]
LABELS = ["cash", "feeding", "_background_1"]


def test_rank_suggestions_orders_and_filters():
    picked = rank_suggestions(THETA, DOCS, LABELS, "cash",
                              included_ids={"d1", "d2", "d3"}, tau=0.2)
    # d1 and d3 tie at 0.7 (doc id breaks the tie), then d2 at 0.3.
    assert [(s.doc, s.probability) for s in picked] == [
        ("d1", 0.7), ("d3", 0.7), ("d2", 0.3)]
    assert picked[0].id == "s-d1-cash"
    assert all(s.status == "pending" for s in picked)


def test_rank_suggestions_excludes_non_included_docs():
    picked = rank_suggestions(THETA, DOCS, LABELS, "feeding",
                              included_ids={"d2"}, tau=0.2)
    assert [s.doc for s in picked] == ["d2"]


def test_rank_suggestions_threshold_is_inclusive():
    picked = rank_suggestions(THETA, DOCS, LABELS, "cash",
                              included_ids=set(DOCS), tau=0.3)
    assert [s.doc for s in picked] == ["d1", "d3", "d2"]


def test_rank_suggestions_unknown_topic():
    with pytest.raises(UnknownTopicError):
        rank_suggestions(THETA, DOCS, LABELS, "nutrition", included_ids=set(DOCS))

"""Project container: workflow rules, persistence, and integrity checks."""

import json
import os

import pytest

from egmkit.egm import AxisItem, Framework, GapConfig, StudyAttributes
from egmkit.errors import (
    DocNotIncludedError,
    IntegrityError,
    NoFrameworkError,
    SchemaVersionMismatchError,
    UnknownAxisIdError,
    UnknownDocError,
    UnknownTopicError,
)
from egmkit.project import SCHEMA_VERSION, Project, new_project
from egmkit.records import StudyRecord


def axis(*ids):
    return tuple(AxisItem(id=i, label=i) for i in ids)


@pytest.fixture
def project():
    p = new_project("p0001", "demo")
    p.framework = Framework(interventions=axis("cash", "feeding"),
                            outcomes=axis("attendance", "nutrition"))
    p.gap_config = GapConfig(reference_year=2025)
    for i in range(4):
        p.corpus.append(StudyRecord(id=f"d{i}", title=f"distinct study number {i}",
                                    year=2015 + i))
    return p


# --- screening workflow ---

def test_screening_sets_current_and_keeps_history(project):
    project.record_screening("d0", "included", reviewer="ana")
    project.record_screening("d0", "excluded", reason="wrong population")
    assert project.screening_status("d0") == "excluded"
    assert [d.decision for d in project.screening_history] == ["included", "excluded"]


def test_screening_identical_resubmission_is_noop(project):
    first = project.record_screening("d0", "included", reviewer="ana")
    again = project.record_screening("d0", "included", reviewer="ana")
    assert again is first
    assert len(project.screening_history) == 1


def test_screening_unknown_doc(project):
    with pytest.raises(UnknownDocError):
        project.record_screening("nope", "included")


def test_screening_queue_partitions_corpus(project):
    project.record_screening("d0", "included")
    project.record_screening("d1", "excluded")
    assert [r.id for r in project.screening_queue("pending")] == ["d2", "d3"]
    assert [r.id for r in project.screening_queue("included")] == ["d0"]
    assert [r.id for r in project.screening_queue("excluded")] == ["d1"]
    with pytest.raises(ValueError):
        project.screening_queue("undecided")


def test_exclusion_orphans_codings_and_reinclusion_restores(project):
    project.record_screening("d0", "included")
    project.record_coding("d0", "cash", "attendance", "positive",
                          StudyAttributes(study_type="impact_evaluation"))
    project.record_screening("d0", "excluded")
    assert project.codings[0].orphaned
    project.record_screening("d0", "included")
    assert not project.codings[0].orphaned


def test_exclusion_voids_pending_suggestions_only(project):
    from egmkit.egm import Suggestion
    project.record_screening("d0", "included")
    project.suggestions = [
        Suggestion(id="s-d0-cash", doc="d0", topic="cash", probability=0.5),
        Suggestion(id="s-d0-feeding", doc="d0", topic="feeding",
                   probability=0.4, status="confirmed"),
        Suggestion(id="s-d1-cash", doc="d1", topic="cash", probability=0.3),
    ]
    project.record_screening("d0", "excluded")
    assert [s.id for s in project.suggestions] == ["s-d0-feeding", "s-d1-cash"]


# --- coding workflow ---

def test_coding_requires_framework():
    p = new_project("p", "p")
    p.corpus.append(StudyRecord(id="d0", title="t"))
    p.record_screening("d0", "included")
    with pytest.raises(NoFrameworkError):
        p.record_coding("d0", "cash", "attendance", "positive",
                        StudyAttributes(study_type="impact_evaluation"))


def test_coding_requires_inclusion(project):
    attrs = StudyAttributes(study_type="impact_evaluation")
    with pytest.raises(DocNotIncludedError):
        project.record_coding("d0", "cash", "attendance", "positive", attrs)
    project.record_screening("d0", "excluded")
    with pytest.raises(DocNotIncludedError):
        project.record_coding("d0", "cash", "attendance", "positive", attrs)


def test_coding_validates_axis_ids(project):
    project.record_screening("d0", "included")
    attrs = StudyAttributes(study_type="impact_evaluation")
    with pytest.raises(UnknownAxisIdError):
        project.record_coding("d0", "vouchers", "attendance", "positive", attrs)
    with pytest.raises(UnknownAxisIdError):
        project.record_coding("d0", "cash", "earnings", "positive", attrs)
    with pytest.raises(UnknownDocError):
        project.record_coding("ghost", "cash", "attendance", "positive", attrs)


def test_coding_upserts_on_key(project):
    project.record_screening("d0", "included")
    attrs = StudyAttributes(study_type="impact_evaluation")
    project.record_coding("d0", "cash", "attendance", "positive", attrs)
    project.record_coding("d0", "cash", "attendance", "negative", attrs)
    project.record_coding("d0", "cash", "nutrition", "positive", attrs)
    assert len(project.codings) == 2
    assert project.codings[0].direction == "negative"


# --- suggestions ---

def make_model(project):
    project.record_screening("d0", "included")
    project.record_screening("d1", "included")
    project.record_screening("d2", "included")
    project.model = {
        "spec": {"topic_labels": ["cash", "feeding", "_background_1"],
                 "keyword_indices": [[0], [1], []], "n_words": 2},
        "theta": [[0.6, 0.3, 0.1], [0.2, 0.7, 0.1], [0.45, 0.45, 0.1]],
        "doc_ids": ["d0", "d1", "d2"],
    }
    project.refresh_suggestions()


def test_refresh_builds_suggestions_for_keyword_topics_only(project):
    make_model(project)
    topics = {s.topic for s in project.suggestions}
    assert topics == {"cash", "feeding"}
    # stored with no threshold: every included doc appears under each topic
    assert len(project.suggestions) == 6


def test_suggestions_for_applies_threshold_and_order(project):
    make_model(project)
    picked = project.suggestions_for("cash", tau=0.3)
    assert [(s.doc, s.probability) for s in picked] == [("d0", 0.6), ("d2", 0.45)]
    with pytest.raises(UnknownTopicError):
        project.suggestions_for("_background_1")
    with pytest.raises(UnknownTopicError):
        project.suggestions_for("nutrition")


def test_set_suggestion_status(project):
    make_model(project)
    s = project.set_suggestion_status("s-d0-cash", "confirmed")
    assert s.status == "confirmed"
    with pytest.raises(KeyError):
        project.set_suggestion_status("s-ghost-cash", "confirmed")
    with pytest.raises(ValueError):
        project.set_suggestion_status("s-d0-cash", "pending")


# --- fit pipeline ---

def test_fit_model_end_to_end(project):
    corpus = []
    for i in range(8):
        theme = "cash transfer stipend money" if i % 2 == 0 \
            else "feeding meal lunch canteen"
        corpus.append(StudyRecord(
            id=f"m{i}", title=f"study number {i} about {theme}",
            abstract=f"{theme} {theme} outcomes measured in cohort {i}",
            year=2020))
    project.corpus = corpus
    for r in corpus:
        project.record_screening(r.id, "included")
    project.keywords = {"cash": ["cash", "stipend"], "feeding": ["feeding", "meal"]}
    model = project.fit_model(sweeps=60, burn_in=20, seed=3, min_df=1)
    assert model["spec"]["topic_labels"] == ["cash", "feeding", "_background_1"]
    assert len(model["doc_ids"]) == 8
    assert project.suggestions  # regenerated from the fit
    assert all(s.status == "pending" for s in project.suggestions)


def test_fit_model_requires_keywords(project):
    from egmkit.errors import NoKeywordsForTopicError
    project.record_screening("d0", "included")
    with pytest.raises(NoKeywordsForTopicError):
        project.fit_model(sweeps=10, burn_in=1)


# --- methodology note ---

def test_methodology_note_is_timestamp_free(project):
    from egmkit.search import ProviderCounts, SearchRun
    run = SearchRun(id="run-0001", query="cash", filters={}, providers=["mock"],
                    status="done", started="2025-01-01T00:00:00+00:00",
                    finished="2025-01-01T00:01:00+00:00")
    run.counts["mock"] = ProviderCounts(fetched=10, kept=8)
    project.search_runs.append(run)
    note = project.methodology_note()
    text = json.dumps(note)
    assert "2025-01-01" not in text
    assert note["search_runs"][0]["counts"]["mock"]["kept"] == 8


# --- persistence ---

def populated_project(project):
    project.query = '"cash transfer" AND attendance'
    project.keywords = {"cash": ["cash"]}
    project.record_screening("d0", "included", reviewer="ana")
    project.record_screening("d1", "excluded", reason="off topic")
    project.record_coding("d0", "cash", "attendance", "positive",
                          StudyAttributes(study_type="impact_evaluation",
                                          geography="KEN"))
    return project


def test_save_load_round_trip(project, tmp_path):
    populated_project(project)
    path = tmp_path / "p0001.json"
    project.save(path)
    loaded = Project.load(path)
    assert loaded.to_dict() == project.to_dict()
    # a second save of the loaded project is byte-identical
    loaded.save(tmp_path / "again.json")
    assert (tmp_path / "again.json").read_text() == path.read_text()


def test_save_is_atomic_when_replace_fails(project, tmp_path, monkeypatch):
    path = tmp_path / "p0001.json"
    project.save(path)
    original = path.read_text()

    def boom(src, dst):
        raise OSError("simulated crash during rename")

    monkeypatch.setattr(os, "replace", boom)
    project.name = "changed"
    with pytest.raises(OSError):
        project.save(path)
    monkeypatch.undo()
    # the original file is untouched and no temp files linger
    assert path.read_text() == original
    assert [f.name for f in tmp_path.iterdir()] == ["p0001.json"]


def test_load_rejects_future_schema(project, tmp_path):
    path = tmp_path / "p.json"
    project.save(path)
    doc = json.loads(path.read_text())
    doc["schema_version"] = SCHEMA_VERSION + 1
    path.write_text(json.dumps(doc))
    with pytest.raises(SchemaVersionMismatchError):
        Project.load(path)


def test_load_rejects_dangling_references(project, tmp_path):
    populated_project(project)
    path = tmp_path / "p.json"
    project.save(path)
    doc = json.loads(path.read_text())
    doc["codings"][0]["doc"] = "ghost"
    doc["screening"]["current"]["phantom"] = {
        "doc": "phantom", "decision": "included", "reason": None,
        "reviewer": "", "timestamp": ""}
    path.write_text(json.dumps(doc))
    with pytest.raises(IntegrityError) as err:
        Project.load(path)
    problems = "\n".join(err.value.problems)
    assert "ghost" in problems and "phantom" in problems


def test_load_rejects_coding_outside_framework(project, tmp_path):
    populated_project(project)
    path = tmp_path / "p.json"
    project.save(path)
    doc = json.loads(path.read_text())
    doc["codings"][0]["intervention"] = "vouchers"
    path.write_text(json.dumps(doc))
    with pytest.raises(IntegrityError, match="vouchers"):
        Project.load(path)

"""Job manager: single active job per project, terminal-state immutability."""

import threading

import pytest

from egmkit.errors import ConflictError, UnknownKindError
from egmkit.jobs import JobManager


def test_job_runs_and_completes():
    manager = JobManager()

    def runner(set_progress):
        set_progress(0.5)
        return {"value": 42}

    job = manager.start("p1", "search", runner)
    done = manager.wait(job.id, timeout=5)
    assert done.status == "done"
    assert done.progress == 1.0
    assert done.result == {"value": 42}
    assert done.error is None


def test_failure_captures_error():
    manager = JobManager()
    job = manager.start("p1", "fit", lambda sp: (_ for _ in ()).throw(RuntimeError("boom")))
    done = manager.wait(job.id, timeout=5)
    assert done.status == "failed"
    assert "boom" in done.error
    assert done.result is None


def test_one_active_job_per_project():
    manager = JobManager()
    release = threading.Event()

    def runner(set_progress):
        release.wait(5)
        return {}

    job = manager.start("p1", "fit", runner)
    with pytest.raises(ConflictError):
        manager.start("p1", "search", lambda sp: {})
    # other projects are unaffected
    other = manager.start("p2", "search", lambda sp: {})
    release.set()
    assert manager.wait(job.id, timeout=5).status == "done"
    assert manager.wait(other.id, timeout=5).status == "done"
    # once terminal, the project can run a new job
    again = manager.start("p1", "search", lambda sp: {})
    assert manager.wait(again.id, timeout=5).status == "done"


def test_unknown_kind_rejected():
    with pytest.raises(UnknownKindError):
        JobManager().start("p1", "refit", lambda sp: {})


def test_terminal_job_ignores_late_progress():
    manager = JobManager()
    captured = {}

    def runner(set_progress):
        captured["hook"] = set_progress
        return {}

    job = manager.start("p1", "search", runner)
    done = manager.wait(job.id, timeout=5)
    assert done.status == "done"
    captured["hook"](0.1)  # late update after completion must be dropped
    assert manager.get(job.id).progress == 1.0


def test_fitting_flag_tracks_fit_jobs_only():
    manager = JobManager()
    release = threading.Event()
    job = manager.start("p1", "search", lambda sp: release.wait(5) or {})
    assert manager.active_job("p1").id == job.id
    assert not manager.fitting("p1")
    release.set()
    manager.wait(job.id, timeout=5)

    release2 = threading.Event()
    fit_job = manager.start("p1", "fit", lambda sp: release2.wait(5) or {})
    assert manager.fitting("p1")
    release2.set()
    manager.wait(fit_job.id, timeout=5)
    assert not manager.fitting("p1")


def test_get_unknown_job():
    assert JobManager().get("j9999") is None

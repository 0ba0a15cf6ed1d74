"""Background jobs for the service: long operations (provider searches,
model fits) run on worker threads while the API stays responsive.

One job per project at a time. A job that reached ``done`` or ``failed``
never changes again; progress updates arriving after the transition are
dropped.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import ConflictError, UnknownKindError

JOB_KINDS = ("search", "fit")
TERMINAL = ("done", "failed")


@dataclass
class Job:
    id: str
    project_id: str
    kind: str
    status: str = "pending"  # pending | running | done | failed
    progress: float = 0.0
    error: Optional[str] = None
    result: Optional[dict] = None

    @property
    def terminal(self) -> bool:
        return self.status in TERMINAL

    def to_dict(self) -> dict:
        return {"id": self.id, "project_id": self.project_id, "kind": self.kind,
                "status": self.status, "progress": self.progress,
                "error": self.error, "result": self.result}


class JobManager:
    """Runs one worker thread per job and tracks per-project activity."""

    def __init__(self):
        self._lock = threading.Lock()
        self._jobs: dict[str, Job] = {}
        self._threads: dict[str, threading.Thread] = {}
        self._counter = 0

    def get(self, job_id: str) -> Optional[Job]:
        with self._lock:
            return self._jobs.get(job_id)

    def active_job(self, project_id: str) -> Optional[Job]:
        with self._lock:
            for job in self._jobs.values():
                if job.project_id == project_id and not job.terminal:
                    return job
        return None

    def fitting(self, project_id: str) -> bool:
        """True while a fit job for the project has not finished. Corpus and
        screening mutations must be rejected in that window."""
        job = self.active_job(project_id)
        return job is not None and job.kind == "fit"

    def start(self, project_id: str, kind: str,
              runner: Callable[[Callable[[float], None]], dict]) -> Job:
        """Launch ``runner`` on a thread; it receives a progress setter and
        returns the job's result payload."""
        if kind not in JOB_KINDS:
            raise UnknownKindError(f"unknown job kind '{kind}'")
        with self._lock:
            for job in self._jobs.values():
                if job.project_id == project_id and not job.terminal:
                    raise ConflictError(
                        f"project '{project_id}' already has an active job '{job.id}'")
            self._counter += 1
            job = Job(id=f"j{self._counter:04d}", project_id=project_id, kind=kind)
            self._jobs[job.id] = job

        def set_progress(value: float) -> None:
            with self._lock:
                if not job.terminal:
                    job.progress = min(max(float(value), 0.0), 1.0)

        def work() -> None:
            with self._lock:
                if job.terminal:
                    return
                job.status = "running"
            try:
                result = runner(set_progress)
            except Exception as exc:
                with self._lock:
                    if not job.terminal:
                        job.status = "failed"
                        job.error = str(exc)
                return
            with self._lock:
                if not job.terminal:
                    job.status = "done"
                    job.progress = 1.0
                    job.result = result

        thread = threading.Thread(target=work, name=f"egmkit-{job.id}", daemon=True)
        with self._lock:
            self._threads[job.id] = thread
        thread.start()
        return job

    def wait(self, job_id: str, timeout: Optional[float] = None) -> Optional[Job]:
        """Block until the job's thread exits (for the CLI and tests)."""
        with self._lock:
            thread = self._threads.get(job_id)
        if thread is not None:
            thread.join(timeout)
        return self.get(job_id)

"""HTTP service exposing projects, jobs, screening, coding, and exports.

All routes live under ``/api/v1``. Validation problems map to 400,
unknown ids to 404, and state conflicts (a second concurrent job, or
corpus/screening writes during a fit) to 409. Long operations run as
background jobs; everything else is synchronous under one store lock, so
every read sees a consistent project state even while a fit is running.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Optional

from fastapi import Body, FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from .egm import EgmFilters, Framework, GapConfig, StudyAttributes, build_egm
from .errors import (
    ConflictError,
    DocNotIncludedError,
    EgmkitError,
    NoFrameworkError,
    NoKeywordsForTopicError,
    QuerySyntaxError,
    SchemaError,
    UnknownAxisIdError,
    UnknownDocError,
    UnknownKindError,
    UnknownTopicError,
)
from .exports import export_egm
from .importer import parse_csv, parse_jsonl
from .jobs import JobManager
from .project import Project, new_project
from .providers import ProviderConfig, load_preset
from .query import parse_query
from .records import SearchFilters
from .search import run_search

_EXPORT_MEDIA_TYPES = {
    "json": "application/json",
    "csv": "text/csv; charset=utf-8",
    "html": "text/html; charset=utf-8",
}


class ProjectStore:
    """In-memory project registry backed by one JSON file per project."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.lock = threading.RLock()
        self.projects: dict[str, Project] = {}
        self.jobs = JobManager()
        for path in sorted(self.data_dir.glob("*.json")):
            project = Project.load(path)
            self.projects[project.id] = project

    def path(self, project_id: str) -> Path:
        return self.data_dir / f"{project_id}.json"

    def create(self, name: str) -> Project:
        with self.lock:
            n = len(self.projects) + 1
            while f"p{n:04d}" in self.projects:
                n += 1
            project = new_project(f"p{n:04d}", name)
            self.projects[project.id] = project
            self.save(project)
            return project

    def get(self, project_id: str) -> Project:
        with self.lock:
            project = self.projects.get(project_id)
        if project is None:
            raise HTTPException(status_code=404,
                                detail=f"unknown project '{project_id}'")
        return project

    def save(self, project: Project) -> None:
        project.save(self.path(project.id))


def _summary(store: ProjectStore, project: Project) -> dict:
    queue = {status: len(project.screening_queue(status))
             for status in ("pending", "included", "excluded")}
    active = store.jobs.active_job(project.id)
    return {
        "id": project.id,
        "name": project.name,
        "schema_version": project.schema_version,
        "framework": project.framework.to_dict() if project.framework else None,
        "criteria": {"query": project.query,
                     "filters": project.search_filters.to_dict()},
        "keywords": project.keywords,
        "gap_config": project.gap_config.to_dict(),
        "counts": {
            "corpus": len(project.corpus),
            **queue,
            "codings": len(project.codings),
            "suggestions": len(project.suggestions),
        },
        "has_model": project.model is not None,
        "model_warnings": project.model_warnings,
        "active_job": active.id if active else None,
    }


def _record_payload(project: Project, record) -> dict:
    decision = project.screening.get(record.id)
    return {
        "id": record.id,
        "title": record.title,
        "abstract": record.abstract,
        "doi": record.doi,
        "year": record.year,
        "authors": record.authors,
        "venue": record.venue,
        "source": record.source,
        "status": project.screening_status(record.id),
        "decision": decision.to_dict() if decision else None,
    }


def _reject_if_fitting(store: ProjectStore, project_id: str) -> None:
    # Corpus and screening writes are frozen while a fit job is active.
    if store.jobs.fitting(project_id):
        raise ConflictError("a model fit is running; retry when it finishes")


def _providers_from_params(params: dict) -> list[ProviderConfig]:
    raw = params.get("providers")
    if not raw:
        raise ValueError("params.providers must list provider configs or preset names")
    providers = []
    for item in raw:
        if isinstance(item, str):
            providers.append(load_preset(item))
        elif isinstance(item, dict):
            providers.append(ProviderConfig.from_dict(item))
        else:
            raise ValueError("each provider must be a preset name or a config object")
    return providers


def _run_search_job(store: ProjectStore, project_id: str, params: dict,
                    set_progress) -> dict:
    """Search runner: fetch outside the lock, merge under it."""
    with store.lock:
        project = store.projects[project_id]
        query_text = project.query
        filters = project.search_filters
        run_id = f"run-{len(project.search_runs) + 1:04d}"
    assert query_text is not None
    query = parse_query(query_text)
    providers = _providers_from_params(params)
    page_cap = int(params.get("page_cap", 100))
    run, new_records, _log = run_search(
        query, query_text, filters, providers, existing=[],
        run_id=run_id, page_cap=page_cap, progress=set_progress,
    )
    with store.lock:
        project = store.projects[project_id]
        added = project.add_records(new_records)
        project.search_runs.append(run)
        store.save(project)
    return {
        "run": run.id,
        "added": added,
        "counts": {name: c.to_dict() for name, c in run.counts.items()},
        "truncated": run.truncated,
    }


def _run_fit_job(store: ProjectStore, project_id: str, params: dict,
                 set_progress) -> dict:
    """Fit runner: compute on a snapshot, commit artifacts under the lock."""
    with store.lock:
        snapshot = Project.from_dict(store.projects[project_id].to_dict())
    sweeps = int(params.get("sweeps", 1500))
    chains = int(params.get("chains", 1))

    def on_sweep(chain: int, sweep: int, _score: float) -> None:
        set_progress((chain * sweeps + sweep) / (chains * sweeps))

    model = snapshot.fit_model(
        sweeps=sweeps,
        burn_in=int(params.get("burn_in", 500)),
        seed=int(params.get("seed", 0)),
        chains=chains,
        min_df=int(params.get("min_df", 2)),
        max_df_ratio=float(params.get("max_df_ratio", 0.95)),
        extra_background=int(params.get("extra_background", 1)),
        progress=on_sweep,
    )
    with store.lock:
        project = store.projects[project_id]
        project.model = snapshot.model
        project.model_warnings = snapshot.model_warnings
        project.suggestions = snapshot.suggestions
        store.save(project)
    return {
        "final_score": model["diagnostics"]["final_score"],
        "n_docs": len(model["doc_ids"]),
        "n_topics": len(model["spec"]["topic_labels"]),
        "n_suggestions": len(snapshot.suggestions),
    }


def create_app(data_dir: str | Path) -> FastAPI:
    app = FastAPI(title="egmkit", version="1.0.0")
    # the review UI is served from its own origin; no cookies or auth involved
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = ProjectStore(data_dir)
    app.state.store = store

    @app.exception_handler(RequestValidationError)
    async def bad_body(_request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(EgmkitError)
    async def domain_error(_request: Request, exc: EgmkitError):
        if isinstance(exc, (UnknownDocError, UnknownTopicError)):
            status = 404
        elif isinstance(exc, (ConflictError, DocNotIncludedError)):
            status = 409
        else:
            # Remaining domain errors are request validation problems:
            # bad queries, bad schemas, bad axis ids, missing framework.
            status = 400
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def value_error(_request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.post("/api/v1/projects", status_code=201)
    def create_project(body: dict = Body(...)):
        name = body.get("name")
        if not isinstance(name, str) or not name.strip():
            raise ValueError("'name' is required")
        with store.lock:
            project = store.create(name.strip())
            return _summary(store, project)

    @app.get("/api/v1/projects")
    def list_projects():
        with store.lock:
            return [{"id": p.id, "name": p.name}
                    for p in sorted(store.projects.values(), key=lambda p: p.id)]

    @app.get("/api/v1/projects/{project_id}")
    def get_project(project_id: str):
        with store.lock:
            return _summary(store, store.get(project_id))

    @app.put("/api/v1/projects/{project_id}/framework")
    def put_framework(project_id: str, body: dict = Body(...)):
        with store.lock:
            project = store.get(project_id)
            try:
                framework = Framework.from_dict(body)
            except (KeyError, TypeError) as exc:
                raise ValueError(f"malformed framework: {exc}")
            # Refuse a framework that would orphan stored codings.
            interventions = set(framework.intervention_ids())
            outcomes = set(framework.outcome_ids())
            for coding in project.codings:
                if coding.intervention not in interventions \
                        or coding.outcome not in outcomes:
                    raise ConflictError(
                        f"coding for doc '{coding.doc}' references axis ids "
                        "missing from the new framework")
            project.framework = framework
            store.save(project)
            return _summary(store, project)

    @app.put("/api/v1/projects/{project_id}/criteria")
    def put_criteria(project_id: str, body: dict = Body(...)):
        with store.lock:
            project = store.get(project_id)
            query = body.get("query")
            if query is not None:
                if not isinstance(query, str):
                    raise ValueError("'query' must be a string")
                parse_query(query)
            filters = SearchFilters.from_dict(body.get("filters"))
            project.query = query
            project.search_filters = filters
            store.save(project)
            return _summary(store, project)

    @app.put("/api/v1/projects/{project_id}/keywords")
    def put_keywords(project_id: str, body: dict = Body(...)):
        if not isinstance(body, dict):
            raise ValueError("keywords must map topic labels to word lists")
        cleaned: dict[str, list[str]] = {}
        for topic, words in body.items():
            if not isinstance(words, list) or not all(isinstance(w, str) for w in words):
                raise ValueError(f"topic '{topic}' must map to a list of words")
            cleaned[str(topic)] = words
        with store.lock:
            project = store.get(project_id)
            project.keywords = cleaned
            store.save(project)
            return _summary(store, project)

    @app.put("/api/v1/projects/{project_id}/gap-config")
    def put_gap_config(project_id: str, body: dict = Body(...)):
        with store.lock:
            project = store.get(project_id)
            project.gap_config = GapConfig.from_dict(body)
            store.save(project)
            return _summary(store, project)

    @app.post("/api/v1/projects/{project_id}/jobs", status_code=202)
    def post_job(project_id: str, body: dict = Body(...)):
        kind = body.get("kind")
        params = body.get("params") or {}
        if kind not in ("search", "fit"):
            raise UnknownKindError(f"unknown job kind {kind!r}")
        with store.lock:
            project = store.get(project_id)
            if kind == "search":
                if project.query is None:
                    raise ValueError("set the criteria query before searching")
                _providers_from_params(params)  # fail fast on bad configs
                runner = lambda sp: _run_search_job(store, project_id, params, sp)
            else:
                if not project.keywords:
                    raise NoKeywordsForTopicError(
                        "define keyword topics before fitting")
                runner = lambda sp: _run_fit_job(store, project_id, params, sp)
            job = store.jobs.start(project_id, kind, runner)
        return job.to_dict()

    @app.get("/api/v1/projects/{project_id}/jobs/{job_id}")
    def get_job(project_id: str, job_id: str):
        store.get(project_id)
        job = store.jobs.get(job_id)
        if job is None or job.project_id != project_id:
            raise HTTPException(status_code=404, detail=f"unknown job '{job_id}'")
        return job.to_dict()

    @app.post("/api/v1/projects/{project_id}/import")
    def post_import(project_id: str, body: dict = Body(...)):
        fmt = body.get("format", "jsonl")
        content = body.get("content")
        if fmt not in ("jsonl", "csv"):
            raise ValueError(f"unknown import format {fmt!r}")
        if not isinstance(content, str):
            raise ValueError("'content' must be a string")
        records = parse_jsonl(content) if fmt == "jsonl" else parse_csv(content)
        with store.lock:
            project = store.get(project_id)
            _reject_if_fitting(store, project_id)
            added = project.add_records(records)
            store.save(project)
            return {"added": added, "corpus": len(project.corpus)}

    @app.get("/api/v1/projects/{project_id}/screening/queue")
    def get_queue(project_id: str, status: str = "pending"):
        with store.lock:
            project = store.get(project_id)
            records = project.screening_queue(status)
            return {
                "status": status,
                "docs": [_record_payload(project, r) for r in records],
                "counts": {s: len(project.screening_queue(s))
                           for s in ("pending", "included", "excluded")},
            }

    @app.post("/api/v1/projects/{project_id}/screening/{doc_id}")
    def post_screening(project_id: str, doc_id: str, body: dict = Body(...)):
        decision = body.get("decision")
        if decision not in ("included", "excluded"):
            raise ValueError("decision must be 'included' or 'excluded'")
        with store.lock:
            project = store.get(project_id)
            _reject_if_fitting(store, project_id)
            entry = project.record_screening(
                doc_id, decision, reason=body.get("reason"),
                reviewer=body.get("reviewer", ""))
            store.save(project)
            return entry.to_dict()

    @app.get("/api/v1/projects/{project_id}/model")
    def get_model(project_id: str):
        with store.lock:
            project = store.get(project_id)
            if project.model is None:
                raise HTTPException(status_code=404, detail="no model fitted yet")
            return {"model": project.model, "warnings": project.model_warnings}

    @app.get("/api/v1/projects/{project_id}/model/suggestions")
    def get_suggestions(project_id: str, topic: str, tau: float = 0.2):
        if not (0.0 <= tau <= 1.0):
            raise ValueError("tau must be within [0, 1]")
        with store.lock:
            project = store.get(project_id)
            if project.model is None:
                raise HTTPException(status_code=404, detail="no model fitted yet")
            picked = project.suggestions_for(topic, tau=tau)
            index = project.record_index()
            docs = []
            for s in picked:
                record = index.get(s.doc)
                payload = s.to_dict()
                payload["title"] = record.title if record else None
                payload["year"] = record.year if record else None
                docs.append(payload)
            return {"topic": topic, "tau": tau, "suggestions": docs}

    @app.post("/api/v1/projects/{project_id}/suggestions/{suggestion_id}")
    def post_suggestion(project_id: str, suggestion_id: str, body: dict = Body(...)):
        status = body.get("status")
        if status not in ("confirmed", "rejected"):
            raise ValueError("status must be 'confirmed' or 'rejected'")
        with store.lock:
            project = store.get(project_id)
            try:
                suggestion = project.set_suggestion_status(suggestion_id, status)
            except KeyError:
                raise HTTPException(status_code=404,
                                    detail=f"unknown suggestion '{suggestion_id}'")
            store.save(project)
            return suggestion.to_dict()

    @app.post("/api/v1/projects/{project_id}/codings")
    def post_coding(project_id: str, body: dict = Body(...)):
        for key in ("doc", "intervention", "outcome", "direction"):
            if not isinstance(body.get(key), str):
                raise ValueError(f"'{key}' is required")
        attributes = StudyAttributes.from_dict(body.get("attributes") or {})
        with store.lock:
            project = store.get(project_id)
            coding = project.record_coding(
                body["doc"], body["intervention"], body["outcome"],
                body["direction"], attributes, reviewer=body.get("reviewer", ""))
            store.save(project)
            return coding.to_dict()

    @app.get("/api/v1/projects/{project_id}/egm")
    def get_egm(project_id: str,
                geography: Optional[str] = None,
                study_type: Optional[str] = None,
                population: Optional[str] = None,
                quality: Optional[str] = None):
        filters = EgmFilters(geography=geography, study_type=study_type,
                             population=population, quality=quality)
        with store.lock:
            project = store.get(project_id)
            return build_egm(project, filters).to_dict()

    @app.get("/api/v1/projects/{project_id}/egm/export")
    def get_egm_export(project_id: str, format: str = "json",
                       geography: Optional[str] = None,
                       study_type: Optional[str] = None,
                       population: Optional[str] = None,
                       quality: Optional[str] = None):
        if format not in _EXPORT_MEDIA_TYPES:
            raise ValueError(f"unsupported export format '{format}'")
        filters = EgmFilters(geography=geography, study_type=study_type,
                             population=population, quality=quality)
        with store.lock:
            project = store.get(project_id)
            matrix = build_egm(project, filters)
        return Response(content=export_egm(matrix, format),
                        media_type=_EXPORT_MEDIA_TYPES[format])

    return app

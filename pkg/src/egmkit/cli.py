"""Command-line interface.

A project lives in one JSON file; its id is the file's stem, so a file
under the service data directory is the same project the HTTP API serves.
Typical flow: init, import or search, screen-batch, fit, suggest,
code-batch, egm.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from .egm import EgmFilters, Framework, GapConfig, StudyAttributes, build_egm
from .errors import EgmkitError
from .exports import export_egm
from .importer import import_records
from .project import Project, new_project
from .providers import ProviderConfig, load_preset
from .query import parse_query
from .records import SearchFilters
from .search import run_search


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _apply_config(project: Project, config: dict) -> None:
    """Apply the optional settings file: framework, criteria, keywords,
    and gap config sections, each independent."""
    if "framework" in config:
        project.framework = Framework.from_dict(config["framework"])
    if "criteria" in config:
        criteria = config["criteria"]
        query = criteria.get("query")
        if query is not None:
            parse_query(query)
        project.query = query
        project.search_filters = SearchFilters.from_dict(criteria.get("filters"))
    if "keywords" in config:
        project.keywords = {str(k): list(v) for k, v in config["keywords"].items()}
    if "gap_config" in config:
        project.gap_config = GapConfig.from_dict(config["gap_config"])


def _open_project(ctx) -> Project:
    path = ctx.obj["project"]
    if path is None:
        raise click.ClickException("--project is required")
    if not Path(path).exists():
        raise click.ClickException(f"no project file at {path} (run 'egmkit init')")
    return Project.load(path)


def _save_project(ctx, project: Project) -> None:
    project.save(ctx.obj["project"])


@click.group()
@click.option("--project", type=click.Path(), default=None,
              help="Path to the project JSON file.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Random seed for model fitting.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="JSON settings file (framework, criteria, keywords, gap_config).")
@click.pass_context
def main(ctx, project, seed, config_path):
    """Build evidence gap maps: search, screen, model, code, export."""
    ctx.ensure_object(dict)
    ctx.obj["project"] = project
    ctx.obj["seed"] = seed
    ctx.obj["config"] = _load_config(config_path)


@main.command()
@click.option("--name", required=True, help="Human-readable project name.")
@click.pass_context
def init(ctx, name):
    """Create a new project file (id taken from the file name)."""
    path = ctx.obj["project"]
    if path is None:
        raise click.ClickException("--project is required")
    if Path(path).exists():
        raise click.ClickException(f"{path} already exists")
    project = new_project(Path(path).stem, name)
    try:
        _apply_config(project, ctx.obj["config"])
    except (EgmkitError, ValueError, KeyError, TypeError) as exc:
        raise click.ClickException(f"bad config: {exc}")
    project.save(path)
    click.echo(f"created project '{project.id}' at {path}")


@main.command("import")
@click.argument("file", type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["jsonl", "csv"]),
              default="jsonl", show_default=True)
@click.pass_context
def import_cmd(ctx, file, fmt):
    """Import records from a JSONL or CSV file into the corpus."""
    project = _open_project(ctx)
    try:
        new_records, log = import_records(file, fmt, project.corpus)
    except EgmkitError as exc:
        raise click.ClickException(str(exc))
    project.corpus.extend(new_records)
    _save_project(ctx, project)
    click.echo(f"imported {len(new_records)} new records "
               f"({len(log)} merged as duplicates); corpus size {len(project.corpus)}")


@main.command()
@click.option("--providers", required=True,
              help="Comma-separated provider preset names or config file paths.")
@click.option("--page-cap", type=int, default=100, show_default=True)
@click.pass_context
def search(ctx, providers, page_cap):
    """Run the project's boolean query against the configured providers."""
    project = _open_project(ctx)
    if project.query is None:
        raise click.ClickException("set a criteria query first (init --config)")
    configs = []
    try:
        for item in providers.split(","):
            item = item.strip()
            if item.endswith(".json") or "/" in item:
                configs.append(ProviderConfig.from_file(item))
            else:
                configs.append(load_preset(item))
        query = parse_query(project.query)
        run, new_records, log = run_search(
            query, project.query, project.search_filters, configs,
            existing=project.corpus,
            run_id=f"run-{len(project.search_runs) + 1:04d}", page_cap=page_cap)
    except EgmkitError as exc:
        raise click.ClickException(str(exc))
    project.corpus.extend(new_records)
    project.search_runs.append(run)
    _save_project(ctx, project)
    for name, counts in run.counts.items():
        status = counts.error or f"fetched {counts.fetched}, kept {counts.kept}"
        click.echo(f"  {name}: {status}")
    click.echo(f"added {len(new_records)} new records "
               f"({len(log)} duplicates merged); corpus size {len(project.corpus)}")


@main.command("screen-batch")
@click.argument("file", type=click.Path(exists=True))
@click.pass_context
def screen_batch(ctx, file):
    """Apply screening decisions from a CSV with columns
    doc,decision[,reason][,reviewer]."""
    project = _open_project(ctx)
    counts = {"included": 0, "excluded": 0}
    with open(file, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"doc", "decision"} <= set(reader.fieldnames):
            raise click.ClickException("CSV must have 'doc' and 'decision' columns")
        for lineno, row in enumerate(reader, start=2):
            try:
                project.record_screening(
                    row["doc"], row["decision"], reason=row.get("reason") or None,
                    reviewer=row.get("reviewer") or "")
            except (EgmkitError, ValueError) as exc:
                raise click.ClickException(f"line {lineno}: {exc}")
            counts[row["decision"]] += 1
    _save_project(ctx, project)
    click.echo(f"recorded {counts['included']} inclusions, "
               f"{counts['excluded']} exclusions")


@main.command()
@click.option("--sweeps", type=int, default=1500, show_default=True)
@click.option("--burn-in", type=int, default=500, show_default=True)
@click.option("--chains", type=int, default=1, show_default=True)
@click.option("--min-df", type=int, default=2, show_default=True)
@click.option("--max-df-ratio", type=float, default=0.95, show_default=True)
@click.option("--extra-background", type=int, default=1, show_default=True)
@click.option("--quiet", is_flag=True, default=False)
@click.pass_context
def fit(ctx, sweeps, burn_in, chains, min_df, max_df_ratio, extra_background, quiet):
    """Fit the keyword topic model on the included documents."""
    project = _open_project(ctx)

    def report(chain, sweep, score):
        if not quiet and sweep % max(1, sweeps // 10) == 0:
            click.echo(f"  chain {chain} sweep {sweep}/{sweeps} score {score:.1f}",
                       err=True)

    try:
        model = project.fit_model(
            sweeps=sweeps, burn_in=burn_in, seed=ctx.obj["seed"], chains=chains,
            min_df=min_df, max_df_ratio=max_df_ratio,
            extra_background=extra_background, progress=report)
    except (EgmkitError, ValueError) as exc:
        raise click.ClickException(str(exc))
    _save_project(ctx, project)
    for warning in project.model_warnings:
        click.echo(f"warning: {warning}", err=True)
    click.echo(f"fitted {len(model['spec']['topic_labels'])} topics over "
               f"{len(model['doc_ids'])} documents; "
               f"final score {model['diagnostics']['final_score']:.2f}")


@main.command()
@click.option("--topic", required=True, help="Keyword topic label.")
@click.option("--tau", type=float, default=0.2, show_default=True)
@click.option("--limit", type=int, default=20, show_default=True)
@click.pass_context
def suggest(ctx, topic, tau, limit):
    """List the top suggested documents for one topic."""
    project = _open_project(ctx)
    if project.model is None:
        raise click.ClickException("no model fitted yet (run 'egmkit fit')")
    try:
        picked = project.suggestions_for(topic, tau=tau)
    except EgmkitError as exc:
        raise click.ClickException(str(exc))
    index = project.record_index()
    for s in picked[:limit]:
        record = index.get(s.doc)
        title = record.title if record else "?"
        click.echo(f"{s.probability:6.3f}  {s.doc}  {title}")
    click.echo(f"{len(picked)} suggestions at tau={tau}")


@main.command("code-batch")
@click.argument("file", type=click.Path(exists=True))
@click.pass_context
def code_batch(ctx, file):
    """Record effect codings from a CSV with columns
    doc,intervention,outcome,direction,study_type and optional
    geography,population,status,quality_rating,reviewer."""
    project = _open_project(ctx)
    required = {"doc", "intervention", "outcome", "direction", "study_type"}
    n = 0
    with open(file, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise click.ClickException(
                "CSV must have columns " + ", ".join(sorted(required)))
        for lineno, row in enumerate(reader, start=2):
            try:
                attributes = StudyAttributes(
                    study_type=row["study_type"],
                    geography=row.get("geography") or None,
                    population=row.get("population") or None,
                    status=row.get("status") or None,
                    quality_rating=row.get("quality_rating") or None)
                project.record_coding(
                    row["doc"], row["intervention"], row["outcome"],
                    row["direction"], attributes, reviewer=row.get("reviewer") or "")
            except (EgmkitError, ValueError) as exc:
                raise click.ClickException(f"line {lineno}: {exc}")
            n += 1
    _save_project(ctx, project)
    click.echo(f"recorded {n} codings ({len(project.codings)} total)")


@main.command()
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "html"]),
              default="json", show_default=True)
@click.option("--out", type=click.Path(), default=None,
              help="Write to a file instead of stdout.")
@click.option("--geography", default=None)
@click.option("--study-type", default=None)
@click.option("--population", default=None)
@click.option("--quality", default=None)
@click.pass_context
def egm(ctx, fmt, out, geography, study_type, population, quality):
    """Build the gap matrix and export it."""
    project = _open_project(ctx)
    filters = EgmFilters(geography=geography, study_type=study_type,
                         population=population, quality=quality)
    try:
        matrix = build_egm(project, filters)
        text = export_egm(matrix, fmt)
    except EgmkitError as exc:
        raise click.ClickException(str(exc))
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out}")


@main.command()
@click.option("--data-dir", type=click.Path(), default="projects", show_default=True,
              help="Directory of project JSON files to serve.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(data_dir, host, port):
    """Run the HTTP service over a directory of projects."""
    import uvicorn

    from .api import create_app

    uvicorn.run(create_app(data_dir), host=host, port=port)


if __name__ == "__main__":
    main()

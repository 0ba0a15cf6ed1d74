"""Render a gap matrix as JSON, CSV, or a standalone HTML heatmap.

All three formats are deterministic functions of the matrix: no
timestamps, no random ids, no environment lookups. Re-running an export
on the same matrix yields byte-identical text.
"""

from __future__ import annotations

import csv
import html
import io
import json

from .egm import EgmMatrix

CSV_COLUMNS = [
    "intervention_id", "intervention_label", "outcome_id", "outcome_label",
    "n_impact_evaluations", "n_systematic_reviews", "n_other_primary",
    "n_positive", "n_negative", "n_non_significant",
    "newest_sr_year", "gap_class",
]

_GAP_COLORS = {
    "absolute_gap": "#f8f9fa",
    "synthesis_gap": "#ffe9a8",
    "populated": "#9ecf9e",
}

_GAP_LABELS = {
    "absolute_gap": "Absolute gap",
    "synthesis_gap": "Synthesis gap",
    "populated": "Populated",
}


def export_egm(matrix: EgmMatrix, format: str = "json") -> str:
    """Serialize the matrix in the requested format."""
    if format == "json":
        return export_json(matrix)
    if format == "csv":
        return export_csv(matrix)
    if format == "html":
        return export_html(matrix)
    raise ValueError(f"unsupported export format '{format}'")


def export_json(matrix: EgmMatrix) -> str:
    """Full matrix plus the methodology note; parse and feed back through
    ``EgmMatrix.from_dict`` to round-trip."""
    return json.dumps(matrix.to_dict(), indent=2, sort_keys=True) + "\n"


def export_csv(matrix: EgmMatrix) -> str:
    """One row per cell in row-major axis order, plus a header row."""
    labels_i = {item.id: item.label for item in matrix.interventions}
    labels_o = {item.id: item.label for item in matrix.outcomes}
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for cell in matrix.cells:
        writer.writerow([
            cell.intervention, labels_i[cell.intervention],
            cell.outcome, labels_o[cell.outcome],
            cell.n_impact_evaluations, cell.n_systematic_reviews,
            cell.n_other_primary,
            cell.n_positive, cell.n_negative, cell.n_non_significant,
            "" if cell.newest_sr_year is None else cell.newest_sr_year,
            cell.gap_class,
        ])
    return buf.getvalue()


def _cell_td(cell, label_i: str, label_o: str) -> str:
    detail = (f"{label_i} x {label_o}: "
              f"{cell.n_impact_evaluations} impact evaluation(s), "
              f"{cell.n_systematic_reviews} systematic review(s), "
              f"{cell.n_other_primary} other primary")
    return (
        f'<td class="cell {cell.gap_class}"'
        f' data-intervention="{html.escape(cell.intervention, quote=True)}"'
        f' data-outcome="{html.escape(cell.outcome, quote=True)}"'
        f' data-gap-class="{cell.gap_class}"'
        f' title="{html.escape(detail, quote=True)}">'
        f'<span class="count">{cell.total}</span>'
        f"</td>"
    )


def export_html(matrix: EgmMatrix) -> str:
    """Self-contained read-only heatmap page: inline styles, no external
    assets, one table cell per matrix cell."""
    labels_i = {item.id: item.label for item in matrix.interventions}
    labels_o = {item.id: item.label for item in matrix.outcomes}
    width = len(matrix.outcomes)

    head_cells = "".join(
        f"<th>{html.escape(item.label)}</th>" for item in matrix.outcomes
    )
    rows = []
    for r, item in enumerate(matrix.interventions):
        tds = "".join(
            _cell_td(matrix.cells[r * width + c],
                     labels_i[matrix.cells[r * width + c].intervention],
                     labels_o[matrix.cells[r * width + c].outcome])
            for c in range(width)
        )
        rows.append(f"<tr><th>{html.escape(item.label)}</th>{tds}</tr>")
    body_rows = "\n".join(rows)

    legend = "".join(
        f'<span class="legend-item {cls}">{_GAP_LABELS[cls]}</span>'
        for cls in ("absolute_gap", "synthesis_gap", "populated")
    )

    method = matrix.methodology or {}
    method_html = ""
    if method:
        method_html = (
            "<h2>Methodology</h2>\n<pre>"
            + html.escape(json.dumps(method, indent=2, sort_keys=True))
            + "</pre>"
        )

    style_rules = "\n".join(
        f".{cls} {{ background: {color}; }}"
        for cls, color in _GAP_COLORS.items()
    )
    cfg = matrix.gap_config
    return f"""<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>Evidence gap map</title>
<style>
body {{ font-family: sans-serif; margin: 2rem; color: #222; }}
table {{ border-collapse: collapse; }}
th, td {{ border: 1px solid #999; padding: 0.5rem 0.9rem; text-align: center; }}
th {{ background: #eef0f2; }}
.cell .count {{ font-weight: bold; }}
.legend-item {{ display: inline-block; padding: 0.2rem 0.6rem; margin-right: 0.6rem;
  border: 1px solid #999; }}
{style_rules}
</style>
</head>
<body>
<h1>Evidence gap map</h1>
<p>Rows are interventions, columns are outcomes. Cell numbers count coded
studies. Gaps follow the configured thresholds (absolute &le; {cfg.absolute_max}
primary studies, synthesis &ge; {cfg.synthesis_min} without a review since
{cfg.sr_cutoff_year}).</p>
<p>{legend}</p>
<table>
<thead><tr><th></th>{head_cells}</tr></thead>
<tbody>
{body_rows}
</tbody>
</table>
{method_html}
</body>
</html>
"""

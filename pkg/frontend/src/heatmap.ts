/** Gap-map heatmap. Renders the /egm payload as a table: interventions as
 * rows, outcomes as columns, each cell showing the server's study total and
 * colored by its gap class. Filter controls re-query the endpoint (one
 * request per change); the quality filter doubles as the quality overlay,
 * since the server recomputes counts and classes for the restricted view.
 * Clicking a cell lists that cell's studies with their coded directions. */

import { ApiClient } from "./api.js";
import type { EgmCell, EgmFilters, EgmMatrix } from "./types.js";

const STUDY_TYPE_OPTIONS = ["", "impact_evaluation", "systematic_review", "other_primary"];
const QUALITY_OPTIONS = ["", "low", "medium", "high"];

export class HeatmapView {
  private matrix: EgmMatrix | null = null;
  private filters: EgmFilters = {};
  private selected: EgmCell | null = null;
  private error = "";

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly projectId: string,
  ) {}

  async load(filters: EgmFilters = this.filters): Promise<void> {
    this.filters = filters;
    try {
      this.matrix = await this.api.getEgm(this.projectId, filters);
      this.selected = null;
      this.error = "";
    } catch (err) {
      this.error = err instanceof Error ? err.message : String(err);
    }
    this.render();
  }

  selectCell(cell: EgmCell): void {
    this.selected = cell;
    this.render();
  }

  render(): void {
    this.root.innerHTML = "";
    this.root.className = "heatmap";
    this.root.appendChild(this.renderFilters());

    if (this.error) {
      const error = document.createElement("div");
      error.className = "heatmap-error";
      error.textContent = this.error;
      this.root.appendChild(error);
    }
    if (!this.matrix) return;

    this.root.appendChild(this.renderTable(this.matrix));
    if (this.selected) this.root.appendChild(this.renderDetail(this.selected));

    const legend = document.createElement("div");
    legend.className = "heatmap-legend";
    for (const gapClass of ["absolute_gap", "synthesis_gap", "populated"]) {
      const item = document.createElement("span");
      item.className = `legend-item cell-${gapClass}`;
      item.textContent = gapClass.replace("_", " ");
      legend.appendChild(item);
    }
    this.root.appendChild(legend);
  }

  private renderFilters(): HTMLElement {
    const bar = document.createElement("div");
    bar.className = "heatmap-filters";

    const geography = document.createElement("input");
    geography.className = "filter-geography";
    geography.placeholder = "ISO3";
    geography.value = this.filters.geography ?? "";
    bar.appendChild(labelled("Geography", geography));

    const studyType = select("filter-study-type", STUDY_TYPE_OPTIONS, this.filters.study_type);
    bar.appendChild(labelled("Study type", studyType));

    const population = document.createElement("input");
    population.className = "filter-population";
    population.value = this.filters.population ?? "";
    bar.appendChild(labelled("Population", population));

    const quality = select("filter-quality", QUALITY_OPTIONS, this.filters.quality);
    bar.appendChild(labelled("Quality overlay", quality));

    const apply = () => {
      void this.load({
        geography: geography.value.trim() || undefined,
        study_type: studyType.value || undefined,
        population: population.value.trim() || undefined,
        quality: quality.value || undefined,
      });
    };
    for (const control of [geography, studyType, population, quality]) {
      control.addEventListener("change", apply);
    }
    return bar;
  }

  private renderTable(matrix: EgmMatrix): HTMLElement {
    const table = document.createElement("table");
    table.className = "heatmap-table";

    const thead = document.createElement("thead");
    const head = document.createElement("tr");
    head.appendChild(document.createElement("th"));
    for (const outcome of matrix.outcomes) {
      const th = document.createElement("th");
      th.textContent = outcome.label;
      head.appendChild(th);
    }
    thead.appendChild(head);
    table.appendChild(thead);

    const byPair = new Map<string, EgmCell>();
    for (const cell of matrix.cells) {
      byPair.set(`${cell.intervention} ${cell.outcome}`, cell);
    }

    const body = document.createElement("tbody");
    for (const intervention of matrix.interventions) {
      const row = document.createElement("tr");
      const header = document.createElement("th");
      header.textContent = intervention.label;
      row.appendChild(header);
      for (const outcome of matrix.outcomes) {
        const cell = byPair.get(`${intervention.id} ${outcome.id}`);
        const td = document.createElement("td");
        row.appendChild(td);
        if (!cell) continue;
        td.className = `egm-cell cell-${cell.gap_class}`;
        td.dataset.intervention = cell.intervention;
        td.dataset.outcome = cell.outcome;
        td.textContent = String(cell.total);
        td.addEventListener("click", () => this.selectCell(cell));
      }
      body.appendChild(row);
    }
    table.appendChild(body);
    return table;
  }

  private renderDetail(cell: EgmCell): HTMLElement {
    const detail = document.createElement("div");
    detail.className = "cell-detail";

    const heading = document.createElement("h4");
    heading.className = "cell-detail-heading";
    heading.textContent =
      `${cell.intervention} × ${cell.outcome}: ${cell.total} studies (${cell.gap_class})`;
    detail.appendChild(heading);

    const counts = document.createElement("p");
    counts.className = "cell-detail-counts";
    counts.textContent =
      `${cell.n_impact_evaluations} impact evaluations, ` +
      `${cell.n_systematic_reviews} systematic reviews, ` +
      `${cell.n_other_primary} other primary · ` +
      `directions: +${cell.n_positive} / -${cell.n_negative} / ` +
      `ns ${cell.n_non_significant}`;
    detail.appendChild(counts);

    const list = document.createElement("ul");
    list.className = "cell-study-list";
    for (const study of cell.studies) {
      const item = document.createElement("li");
      item.className = "cell-study";
      const year = study.year ? ` ${study.year}` : "";
      item.textContent = `${study.doc}${year}: ${study.direction} (${study.study_type})`;
      list.appendChild(item);
    }
    detail.appendChild(list);
    return detail;
  }
}

function labelled(text: string, control: HTMLElement): HTMLElement {
  const label = document.createElement("label");
  label.textContent = `${text} `;
  label.appendChild(control);
  return label;
}

function select(className: string, options: string[], current?: string): HTMLSelectElement {
  const control = document.createElement("select");
  control.className = className;
  for (const value of options) {
    const option = document.createElement("option");
    option.value = value;
    option.textContent = value || "(any)";
    if (value === (current ?? "")) option.selected = true;
    control.appendChild(option);
  }
  return control;
}

/** Suggestion review for one keyword topic. The service returns suggestions
 * already ranked by document-topic probability; rows render in payload order
 * with the probability printed to two decimals. Confirm opens a coding form
 * (other-axis pick, effect direction, study attributes) whose submit sends
 * exactly one coding POST followed by the suggestion status update; reject
 * sends only the status update. */

import { ApiClient } from "./api.js";
import type { Direction, Framework, StudyAttributes, StudyType, Suggestion } from "./types.js";

const DIRECTIONS: Direction[] = ["positive", "negative", "non_significant"];
const STUDY_TYPES: StudyType[] = ["impact_evaluation", "systematic_review", "other_primary"];
const QUALITY_RATINGS = ["", "low", "medium", "high"];

export interface CodingFormValues {
  otherAxis: string;
  direction: Direction;
  studyType: StudyType;
  geography?: string;
  population?: string;
  quality?: string;
}

export class SuggestionsView {
  private suggestions: Suggestion[] = [];
  private topic = "";
  private tau = 0.2;
  private openFormFor: string | null = null;
  private busy = false;
  private error = "";

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly projectId: string,
    private readonly framework: Framework,
  ) {}

  async load(topic: string, tau = 0.2): Promise<void> {
    const payload = await this.api.getSuggestions(this.projectId, topic, tau);
    this.topic = payload.topic;
    this.tau = payload.tau;
    this.suggestions = payload.suggestions;
    this.openFormFor = null;
    this.error = "";
    this.render();
  }

  openForm(suggestionId: string): void {
    this.openFormFor = suggestionId;
    this.error = "";
    this.render();
  }

  closeForm(): void {
    this.openFormFor = null;
    this.render();
  }

  async reject(suggestion: Suggestion): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      const updated = await this.api.postSuggestion(this.projectId, suggestion.id, "rejected");
      suggestion.status = updated.status;
    } catch (err) {
      this.error = err instanceof Error ? err.message : String(err);
    } finally {
      this.busy = false;
      this.render();
    }
  }

  async submitCoding(suggestion: Suggestion, values: CodingFormValues): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    const onInterventions = this.framework.topic_axis === "interventions";
    const attributes: StudyAttributes = { study_type: values.studyType };
    if (values.geography) attributes.geography = values.geography;
    if (values.population) attributes.population = values.population;
    if (values.quality) attributes.quality_rating = values.quality;
    try {
      await this.api.postCoding(this.projectId, {
        doc: suggestion.doc,
        intervention: onInterventions ? suggestion.topic : values.otherAxis,
        outcome: onInterventions ? values.otherAxis : suggestion.topic,
        direction: values.direction,
        attributes,
      });
      const updated = await this.api.postSuggestion(this.projectId, suggestion.id, "confirmed");
      suggestion.status = updated.status;
      this.openFormFor = null;
      this.error = "";
    } catch (err) {
      this.error = err instanceof Error ? err.message : String(err);
    } finally {
      this.busy = false;
      this.render();
    }
  }

  private otherAxisItems() {
    return this.framework.topic_axis === "interventions"
      ? this.framework.outcomes
      : this.framework.interventions;
  }

  render(): void {
    this.root.innerHTML = "";
    this.root.className = "suggestions";

    const heading = document.createElement("h3");
    heading.className = "suggestions-heading";
    heading.textContent = `Suggestions for ${this.topic} at tau=${this.tau}`;
    this.root.appendChild(heading);

    if (this.error) {
      const error = document.createElement("div");
      error.className = "suggestions-error";
      error.textContent = this.error;
      this.root.appendChild(error);
    }

    if (this.suggestions.length === 0) {
      const empty = document.createElement("p");
      empty.className = "suggestions-empty";
      empty.textContent = "No suggestions above the threshold.";
      this.root.appendChild(empty);
      return;
    }

    const list = document.createElement("ol");
    list.className = "suggestion-list";
    for (const suggestion of this.suggestions) {
      list.appendChild(this.renderRow(suggestion));
    }
    this.root.appendChild(list);
  }

  private renderRow(suggestion: Suggestion): HTMLElement {
    const row = document.createElement("li");
    row.className = `suggestion-row status-${suggestion.status}`;
    row.dataset.suggestionId = suggestion.id;

    const title = document.createElement("span");
    title.className = "suggestion-title";
    title.textContent = suggestion.title ?? suggestion.doc;
    row.appendChild(title);

    const prob = document.createElement("span");
    prob.className = "suggestion-prob";
    prob.textContent = suggestion.probability.toFixed(2);
    row.appendChild(prob);

    const status = document.createElement("span");
    status.className = "suggestion-status";
    status.textContent = suggestion.status;
    row.appendChild(status);

    if (suggestion.status === "pending") {
      const confirm = document.createElement("button");
      confirm.className = "btn-confirm";
      confirm.textContent = "Confirm";
      confirm.addEventListener("click", () => this.openForm(suggestion.id));
      row.appendChild(confirm);

      const reject = document.createElement("button");
      reject.className = "btn-reject";
      reject.textContent = "Reject";
      reject.addEventListener("click", () => void this.reject(suggestion));
      row.appendChild(reject);
    }

    if (this.openFormFor === suggestion.id) {
      row.appendChild(this.renderForm(suggestion));
    }
    return row;
  }

  private renderForm(suggestion: Suggestion): HTMLElement {
    const form = document.createElement("form");
    form.className = "coding-form";

    const otherAxis = document.createElement("select");
    otherAxis.className = "coding-other-axis";
    for (const item of this.otherAxisItems()) {
      const option = document.createElement("option");
      option.value = item.id;
      option.textContent = item.label;
      otherAxis.appendChild(option);
    }
    form.appendChild(labelled("Pair with", otherAxis));

    const direction = document.createElement("select");
    direction.className = "coding-direction";
    for (const value of DIRECTIONS) {
      const option = document.createElement("option");
      option.value = value;
      option.textContent = value;
      direction.appendChild(option);
    }
    form.appendChild(labelled("Direction", direction));

    const studyType = document.createElement("select");
    studyType.className = "coding-study-type";
    for (const value of STUDY_TYPES) {
      const option = document.createElement("option");
      option.value = value;
      option.textContent = value;
      studyType.appendChild(option);
    }
    form.appendChild(labelled("Study type", studyType));

    const geography = document.createElement("input");
    geography.className = "coding-geography";
    geography.placeholder = "ISO3, e.g. KEN";
    form.appendChild(labelled("Geography", geography));

    const population = document.createElement("input");
    population.className = "coding-population";
    form.appendChild(labelled("Population", population));

    const quality = document.createElement("select");
    quality.className = "coding-quality";
    for (const value of QUALITY_RATINGS) {
      const option = document.createElement("option");
      option.value = value;
      option.textContent = value || "(unrated)";
      quality.appendChild(option);
    }
    form.appendChild(labelled("Quality", quality));

    const submit = document.createElement("button");
    submit.type = "submit";
    submit.className = "btn-submit-coding";
    submit.textContent = "Save coding";
    form.appendChild(submit);

    const cancel = document.createElement("button");
    cancel.type = "button";
    cancel.className = "btn-cancel-coding";
    cancel.textContent = "Cancel";
    cancel.addEventListener("click", () => this.closeForm());
    form.appendChild(cancel);

    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitCoding(suggestion, {
        otherAxis: otherAxis.value,
        direction: direction.value as Direction,
        studyType: studyType.value as StudyType,
        geography: geography.value.trim() || undefined,
        population: population.value.trim() || undefined,
        quality: quality.value || undefined,
      });
    });
    return form;
  }
}

function labelled(text: string, control: HTMLElement): HTMLElement {
  const label = document.createElement("label");
  label.textContent = `${text} `;
  label.appendChild(control);
  return label;
}

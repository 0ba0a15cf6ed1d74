/** Keyboard-first screening queue. Shows one pending document at a time;
 * [i] includes, [x] excludes. Each decision POSTs immediately and the queue
 * advances only after the server commits it. A 409 (fit running) locks the
 * queue with a banner; other rejections surface inline without advancing. */

import { ApiClient, ApiError } from "./api.js";
import type { QueueDoc } from "./types.js";

const KEY_DECISIONS: Record<string, "included" | "excluded"> = {
  i: "included",
  x: "excluded",
};

export class ScreeningView {
  private docs: QueueDoc[] = [];
  private counts = { pending: 0, included: 0, excluded: 0 };
  private index = 0;
  private busy = false;
  private banner = "";
  private error = "";

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly projectId: string,
  ) {
    this.root.tabIndex = 0; // focusable so key handling works without a form
    this.root.addEventListener("keydown", (event) => this.onKey(event as KeyboardEvent));
  }

  async load(): Promise<void> {
    const queue = await this.api.getQueue(this.projectId, "pending");
    this.docs = queue.docs;
    this.counts = queue.counts;
    this.index = 0;
    this.banner = "";
    this.error = "";
    this.render();
  }

  current(): QueueDoc | null {
    return this.index < this.docs.length ? this.docs[this.index] : null;
  }

  private onKey(event: KeyboardEvent): void {
    const decision = KEY_DECISIONS[event.key.toLowerCase()];
    if (!decision) return;
    event.preventDefault();
    void this.decide(decision);
  }

  async decide(decision: "included" | "excluded"): Promise<void> {
    const doc = this.current();
    if (!doc || this.busy) return;
    this.busy = true;
    this.error = "";
    try {
      const entry = await this.api.postScreening(this.projectId, doc.id, { decision });
      doc.status = entry.decision;
      doc.decision = entry;
      this.index += 1;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.banner = "model running, screening locked";
      } else {
        this.error = err instanceof Error ? err.message : String(err);
      }
    } finally {
      this.busy = false;
      this.render();
    }
  }

  render(): void {
    this.root.innerHTML = "";
    this.root.className = "screening";

    if (this.banner) {
      const banner = document.createElement("div");
      banner.className = "screening-banner";
      banner.textContent = this.banner;
      this.root.appendChild(banner);
    }

    const progress = document.createElement("div");
    progress.className = "queue-progress";
    progress.textContent =
      `${this.docs.length - this.index} of ${this.docs.length} pending in this batch ` +
      `(project: ${this.counts.pending} pending, ${this.counts.included} included, ` +
      `${this.counts.excluded} excluded)`;
    this.root.appendChild(progress);

    const doc = this.current();
    if (!doc) {
      const done = document.createElement("div");
      done.className = "screening-complete";
      done.textContent = "Screening queue complete. Reload to fetch new arrivals.";
      this.root.appendChild(done);
      return;
    }

    const card = document.createElement("article");
    card.className = "doc-card";

    const title = document.createElement("h3");
    title.className = "doc-title";
    title.textContent = doc.title;
    card.appendChild(title);

    const meta = document.createElement("p");
    meta.className = "doc-meta";
    const parts = [doc.year ? String(doc.year) : null, doc.venue, doc.doi].filter(Boolean);
    meta.textContent = parts.join(" · ");
    card.appendChild(meta);

    const source = document.createElement("p");
    source.className = "doc-source";
    source.textContent = `source: ${doc.source}`;
    card.appendChild(source);

    const abstract = document.createElement("p");
    abstract.className = "doc-abstract";
    abstract.textContent = doc.abstract || "(no abstract)";
    card.appendChild(abstract);

    const controls = document.createElement("div");
    controls.className = "screening-controls";

    const include = document.createElement("button");
    include.className = "btn-include";
    include.textContent = "Include [i]";
    include.addEventListener("click", () => void this.decide("included"));
    controls.appendChild(include);

    const exclude = document.createElement("button");
    exclude.className = "btn-exclude";
    exclude.textContent = "Exclude [x]";
    exclude.addEventListener("click", () => void this.decide("excluded"));
    controls.appendChild(exclude);

    card.appendChild(controls);

    if (this.error) {
      const error = document.createElement("div");
      error.className = "screening-error";
      error.textContent = this.error;
      card.appendChild(error);
    }

    this.root.appendChild(card);
  }
}

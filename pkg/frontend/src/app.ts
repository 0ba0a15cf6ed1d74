/** Operator console shell: pick a project, then work through the pipeline
 * stages in order: screen the queue, review topic suggestions into codings,
 * explore the gap map. A settings panel edits keyword lists and launches
 * model fits; fit progress is polled at a fixed interval and the suggestion
 * topics refresh when the job finishes. All state lives on the server, so a
 * reload always reconstructs the same view. */

import { ApiClient } from "./api.js";
import { HeatmapView } from "./heatmap.js";
import { ScreeningView } from "./screening.js";
import { SuggestionsView } from "./suggestions.js";
import type { ProjectSummary } from "./types.js";

const POLL_INTERVAL_MS = 1500;
const TABS = ["screening", "suggestions", "gap-map", "settings"] as const;
type Tab = (typeof TABS)[number];

declare global {
  interface Window {
    EGMKIT_API_BASE?: string;
  }
}

export class App {
  private readonly api: ApiClient;
  private summary: ProjectSummary | null = null;
  private tab: Tab = "screening";
  private screening: ScreeningView | null = null;
  private suggestions: SuggestionsView | null = null;
  private heatmap: HeatmapView | null = null;
  private pollTimer: ReturnType<typeof setInterval> | null = null;
  private jobStatus = "";

  constructor(private readonly root: HTMLElement, api?: ApiClient) {
    this.api = api ?? new ApiClient(window.EGMKIT_API_BASE ?? "");
  }

  async start(): Promise<void> {
    const projects = await this.api.listProjects();
    this.root.innerHTML = "";

    const header = document.createElement("header");
    header.className = "app-header";

    const picker = document.createElement("select");
    picker.className = "project-picker";
    for (const project of projects) {
      const option = document.createElement("option");
      option.value = project.id;
      option.textContent = `${project.id}: ${project.name}`;
      picker.appendChild(option);
    }
    picker.addEventListener("change", () => void this.openProject(picker.value));
    header.appendChild(picker);

    const nav = document.createElement("nav");
    nav.className = "app-tabs";
    for (const tab of TABS) {
      const button = document.createElement("button");
      button.className = `tab-${tab}`;
      button.textContent = tab.replace("-", " ");
      button.addEventListener("click", () => this.showTab(tab));
      nav.appendChild(button);
    }
    header.appendChild(nav);
    this.root.appendChild(header);

    const main = document.createElement("main");
    main.className = "app-main";
    this.root.appendChild(main);

    if (projects.length > 0) {
      await this.openProject(projects[0].id);
    } else {
      main.textContent = "No projects yet. Create one through the API or CLI.";
    }
  }

  private main(): HTMLElement {
    return this.root.querySelector("main") as HTMLElement;
  }

  async openProject(projectId: string): Promise<void> {
    this.summary = await this.api.getProject(projectId);
    const main = this.main();
    main.innerHTML = "";

    const screeningRoot = document.createElement("section");
    const suggestionsRoot = document.createElement("section");
    const heatmapRoot = document.createElement("section");
    const settingsRoot = document.createElement("section");
    screeningRoot.id = "screening";
    suggestionsRoot.id = "suggestions";
    heatmapRoot.id = "gap-map";
    settingsRoot.id = "settings";
    main.append(screeningRoot, suggestionsRoot, heatmapRoot, settingsRoot);

    this.screening = new ScreeningView(screeningRoot, this.api, projectId);
    await this.screening.load();

    this.heatmap = this.summary.framework
      ? new HeatmapView(heatmapRoot, this.api, projectId)
      : null;
    if (this.heatmap) await this.heatmap.load();

    this.renderSuggestionsPanel(suggestionsRoot, projectId);
    this.renderSettings(settingsRoot, projectId);
    this.showTab(this.tab);
  }

  private showTab(tab: Tab): void {
    this.tab = tab;
    for (const name of TABS) {
      const section = this.main().querySelector<HTMLElement>(`#${name}`);
      if (section) section.hidden = name !== tab;
    }
  }

  private renderSuggestionsPanel(container: HTMLElement, projectId: string): void {
    container.innerHTML = "";
    const summary = this.summary;
    if (!summary || !summary.framework) {
      container.textContent = "Define a framework before reviewing suggestions.";
      return;
    }
    if (!summary.has_model) {
      container.textContent = "Fit a model (settings tab) to get suggestions.";
      return;
    }

    const topics = Object.keys(summary.keywords).sort();
    const bar = document.createElement("div");
    bar.className = "suggestions-bar";

    const topicPick = document.createElement("select");
    topicPick.className = "topic-picker";
    for (const topic of topics) {
      const option = document.createElement("option");
      option.value = topic;
      option.textContent = topic;
      topicPick.appendChild(option);
    }
    bar.appendChild(topicPick);

    const tauInput = document.createElement("input");
    tauInput.className = "tau-input";
    tauInput.type = "number";
    tauInput.step = "0.05";
    tauInput.min = "0";
    tauInput.max = "1";
    tauInput.value = "0.2";
    bar.appendChild(tauInput);

    const listRoot = document.createElement("div");
    this.suggestions = new SuggestionsView(listRoot, this.api, projectId, summary.framework);
    const reload = () =>
      void this.suggestions?.load(topicPick.value, Number(tauInput.value) || 0.2);
    topicPick.addEventListener("change", reload);
    tauInput.addEventListener("change", reload);

    container.append(bar, listRoot);
    if (topics.length > 0) reload();
  }

  private renderSettings(container: HTMLElement, projectId: string): void {
    container.innerHTML = "";
    const summary = this.summary;
    if (!summary) return;

    const keywordBox = document.createElement("textarea");
    keywordBox.className = "keywords-editor";
    keywordBox.rows = 8;
    keywordBox.value = Object.entries(summary.keywords)
      .map(([topic, words]) => `${topic}: ${words.join(", ")}`)
      .join("\n");

    const saveKeywords = document.createElement("button");
    saveKeywords.className = "btn-save-keywords";
    saveKeywords.textContent = "Save keywords";

    const status = document.createElement("p");
    status.className = "settings-status";

    saveKeywords.addEventListener("click", () => {
      void (async () => {
        try {
          const keywords = parseKeywordLines(keywordBox.value);
          this.summary = await this.api.putKeywords(projectId, keywords);
          status.textContent = "Keywords saved.";
        } catch (err) {
          status.textContent = err instanceof Error ? err.message : String(err);
        }
      })();
    });

    const fitButton = document.createElement("button");
    fitButton.className = "btn-fit";
    fitButton.textContent = "Fit model";
    fitButton.addEventListener("click", () => void this.startFit(projectId, status));

    container.append(keywordBox, saveKeywords, fitButton, status);
  }

  private async startFit(projectId: string, status: HTMLElement): Promise<void> {
    if (this.pollTimer) return; // one job at a time
    try {
      const job = await this.api.startJob(projectId, "fit");
      this.jobStatus = job.status;
      status.textContent = `fit ${job.status}`;
      this.pollTimer = setInterval(() => {
        void (async () => {
          const current = await this.api.getJob(projectId, job.id);
          this.jobStatus = current.status;
          status.textContent = `fit ${current.status} (${Math.round(current.progress * 100)}%)`;
          if (current.status === "done" || current.status === "failed") {
            if (this.pollTimer) clearInterval(this.pollTimer);
            this.pollTimer = null;
            if (current.status === "failed") {
              status.textContent = `fit failed: ${current.error ?? "unknown error"}`;
            } else {
              await this.openProject(projectId); // pick up the new model
            }
          }
        })();
      }, POLL_INTERVAL_MS);
    } catch (err) {
      status.textContent = err instanceof Error ? err.message : String(err);
    }
  }

  jobState(): string {
    return this.jobStatus;
  }
}

export function parseKeywordLines(text: string): Record<string, string[]> {
  const keywords: Record<string, string[]> = {};
  for (const raw of text.split("\n")) {
    const line = raw.trim();
    if (!line) continue;
    const colon = line.indexOf(":");
    if (colon < 1) throw new Error(`expected "topic: word, word" but got "${line}"`);
    const topic = line.slice(0, colon).trim();
    const words = line
      .slice(colon + 1)
      .split(",")
      .map((word) => word.trim())
      .filter(Boolean);
    keywords[topic] = words;
  }
  return keywords;
}

const mount = typeof document !== "undefined" ? document.getElementById("egmkit-app") : null;
if (mount) {
  void new App(mount).start();
}

/** Thin fetch client for the /api/v1 contract. Every method maps onto one
 * documented endpoint; non-2xx responses become ApiError with the service's
 * detail message so views can surface them inline. */

import type {
  Coding,
  CodingRequest,
  EgmFilters,
  EgmMatrix,
  Job,
  ProjectRef,
  ProjectSummary,
  ScreeningDecision,
  ScreeningQueue,
  Suggestion,
  SuggestionList,
  SuggestionStatus,
} from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

function query(params: Record<string, string | number | undefined>): string {
  const search = new URLSearchParams();
  for (const [key, value] of Object.entries(params)) {
    if (value !== undefined && value !== "") search.set(key, String(value));
  }
  const text = search.toString();
  return text ? `?${text}` : "";
}

export class ApiClient {
  constructor(
    private readonly base = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(`${this.base}/api/v1${path}`, init);
    const text = await response.text();
    let payload: unknown = null;
    if (text) {
      try {
        payload = JSON.parse(text);
      } catch {
        payload = null;
      }
    }
    if (!response.ok) {
      const detail =
        payload && typeof (payload as { detail?: unknown }).detail === "string"
          ? (payload as { detail: string }).detail
          : `HTTP ${response.status}`;
      throw new ApiError(response.status, detail);
    }
    return payload as T;
  }

  listProjects(): Promise<ProjectRef[]> {
    return this.request("GET", "/projects");
  }

  createProject(name: string): Promise<ProjectSummary> {
    return this.request("POST", "/projects", { name });
  }

  getProject(projectId: string): Promise<ProjectSummary> {
    return this.request("GET", `/projects/${projectId}`);
  }

  putKeywords(projectId: string, keywords: Record<string, string[]>): Promise<ProjectSummary> {
    return this.request("PUT", `/projects/${projectId}/keywords`, keywords);
  }

  getQueue(projectId: string, status = "pending"): Promise<ScreeningQueue> {
    return this.request("GET", `/projects/${projectId}/screening/queue${query({ status })}`);
  }

  postScreening(
    projectId: string,
    docId: string,
    body: { decision: "included" | "excluded"; reason?: string; reviewer?: string },
  ): Promise<ScreeningDecision> {
    return this.request("POST", `/projects/${projectId}/screening/${docId}`, body);
  }

  getSuggestions(projectId: string, topic: string, tau: number): Promise<SuggestionList> {
    return this.request(
      "GET",
      `/projects/${projectId}/model/suggestions${query({ topic, tau })}`,
    );
  }

  postSuggestion(
    projectId: string,
    suggestionId: string,
    status: Exclude<SuggestionStatus, "pending">,
  ): Promise<Suggestion> {
    return this.request("POST", `/projects/${projectId}/suggestions/${suggestionId}`, { status });
  }

  postCoding(projectId: string, body: CodingRequest): Promise<Coding> {
    return this.request("POST", `/projects/${projectId}/codings`, body);
  }

  getEgm(projectId: string, filters: EgmFilters = {}): Promise<EgmMatrix> {
    return this.request("GET", `/projects/${projectId}/egm${query({ ...filters })}`);
  }

  startJob(projectId: string, kind: "search" | "fit", params: Record<string, unknown> = {}): Promise<Job> {
    return this.request("POST", `/projects/${projectId}/jobs`, { kind, params });
  }

  getJob(projectId: string, jobId: string): Promise<Job> {
    return this.request("GET", `/projects/${projectId}/jobs/${jobId}`);
  }
}

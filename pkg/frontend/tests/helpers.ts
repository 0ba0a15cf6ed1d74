/** Test plumbing: fixture loading plus a fake fetch that records every
 * request and answers from configured routes. Fixtures are recorded from the
 * real service by scripts/record_fixtures.py, so assertions against them are
 * assertions against the live contract. */

import { readFileSync } from "node:fs";
import { join } from "node:path";

import type { FetchLike } from "../src/api.js";

// vitest runs from the package root, so resolve fixtures relative to cwd
export function fixture<T>(name: string): T {
  const path = join(process.cwd(), "tests", "fixtures", `${name}.json`);
  return JSON.parse(readFileSync(path, "utf-8")) as T;
}

export interface RecordedRequest {
  method: string;
  url: string;
  body: unknown;
}

interface RouteResult {
  status?: number;
  body: unknown;
}

type Handler = (request: RecordedRequest) => RouteResult;

export class FakeService {
  readonly requests: RecordedRequest[] = [];
  private readonly routes: Array<{ method: string; pattern: RegExp; handler: Handler }> = [];

  on(method: string, pattern: RegExp, result: unknown | Handler, status = 200): this {
    const handler: Handler =
      typeof result === "function" ? (result as Handler) : () => ({ status, body: result });
    this.routes.push({ method: method.toUpperCase(), pattern, handler });
    return this;
  }

  calls(method: string, pattern: RegExp): RecordedRequest[] {
    return this.requests.filter(
      (request) => request.method === method.toUpperCase() && pattern.test(request.url),
    );
  }

  fetch: FetchLike = (url, init) => {
    const method = (init?.method ?? "GET").toUpperCase();
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    const request: RecordedRequest = { method, url, body };
    this.requests.push(request);

    let result: RouteResult = {
      status: 500,
      body: { detail: `no fake route for ${method} ${url}` },
    };
    for (const route of this.routes) {
      if (route.method === method && route.pattern.test(url)) {
        result = route.handler(request);
        break;
      }
    }
    const status = result.status ?? 200;
    // Just enough of the fetch Response surface for ApiClient.
    const response = {
      ok: status < 400,
      status,
      text: () => Promise.resolve(JSON.stringify(result.body)),
    } as Response;
    return Promise.resolve(response);
  };
}

/** Let pending promise chains (fake fetch, view updates) settle. */
export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

export function mountRoot(): HTMLElement {
  const root = document.createElement("div");
  document.body.appendChild(root);
  return root;
}

// Thin typed client for the effect service. The interface never computes
// effect numbers itself; everything shown on screen comes from these calls.

import type { ModelMeta, SimAnswer, SimRequest } from "./types.js";

export class ServiceError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`service returned ${status}: ${detail}`);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const detail =
        typeof (body as { detail?: unknown }).detail === "string"
          ? (body as { detail: string }).detail
          : response.statusText;
      throw new ServiceError(response.status, detail);
    }
    return body as T;
  }

  getMeta(): Promise<ModelMeta> {
    return this.request<ModelMeta>("/model/meta");
  }

  simulate(query: SimRequest): Promise<SimAnswer> {
    const path = query.mode === "forward" ? "/simulate/forward" : "/simulate/goal";
    return this.request<SimAnswer>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(query),
    });
  }
}

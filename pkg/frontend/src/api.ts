// Thin client for the scenario service. All methods throw ApiError with the
// field-level detail when the service rejects a request.

import type { DefaultsResponse, FieldError, SimulateResponse } from "./types.js";

export class ApiError extends Error {
  status: number;
  errors: FieldError[];

  constructor(status: number, errors: FieldError[]) {
    super(errors.map((e) => `${e.field}: ${e.message}`).join("; ") || `HTTP ${status}`);
    this.status = status;
    this.errors = errors;
  }
}

async function parseErrors(response: Response): Promise<FieldError[]> {
  try {
    const body = await response.json();
    if (Array.isArray(body.detail)) return body.detail as FieldError[];
  } catch {
    // fall through to a generic error
  }
  return [{ code: "HTTP", field: "", message: `status ${response.status}` }];
}

export class ServiceClient {
  constructor(private baseUrl: string = "") {}

  async defaults(): Promise<DefaultsResponse> {
    const response = await fetch(`${this.baseUrl}/api/defaults`);
    if (!response.ok) throw new ApiError(response.status, await parseErrors(response));
    return response.json();
  }

  async health(): Promise<{ status: string; version: string }> {
    const response = await fetch(`${this.baseUrl}/api/health`);
    if (!response.ok) throw new ApiError(response.status, await parseErrors(response));
    return response.json();
  }

  async simulate(
    scenario: Record<string, unknown>,
    seed?: number,
    downsampleEvery = 1,
  ): Promise<SimulateResponse> {
    const body: Record<string, unknown> = { scenario, downsample_every: downsampleEvery };
    if (seed !== undefined) body.seed = seed;
    const response = await fetch(`${this.baseUrl}/api/simulate`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) throw new ApiError(response.status, await parseErrors(response));
    return response.json();
  }
}

/** Thin client over the rating server's HTTP API.
 *
 * At most one rate request matters at a time: responses to superseded
 * requests resolve to null and are discarded by the caller.
 */

import type { Bundle, FieldError, RateRequest } from "./types.js";

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public fieldErrors: FieldError[],
    message: string,
  ) {
    super(message);
  }
}

async function toApiError(response: Response): Promise<ApiError> {
  let fieldErrors: FieldError[] = [];
  let message = `request failed with status ${response.status}`;
  try {
    const body = await response.json();
    if (Array.isArray(body.errors)) {
      fieldErrors = body.errors;
      message = fieldErrors.map((e) => `${e.field}: ${e.message}`).join("; ");
    } else if (body.error === "missing_reference") {
      const g = body.group;
      message = `no reference selected for ${g.dataset} on ${g.environment}`;
    } else if (typeof body.error === "string") {
      message = body.error;
    }
  } catch {
    // non-JSON error body; keep the status message
  }
  return new ApiError(response.status, fieldErrors, message);
}

export class RateClient {
  private issue = 0;

  constructor(
    private baseUrl = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  /** POST the request; resolves null if a newer request was issued meanwhile. */
  async rate(request: RateRequest): Promise<Bundle | null> {
    const ticket = ++this.issue;
    const response = await this.fetchFn(`${this.baseUrl}/api/rate`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
    });
    if (ticket !== this.issue) {
      return null;
    }
    if (!response.ok) {
      throw await toApiError(response);
    }
    return (await response.json()) as Bundle;
  }

  labelUrl(experimentId: string, schemeHash: string): string {
    const id = encodeURIComponent(experimentId);
    return `${this.baseUrl}/api/label/${id}?scheme_hash=${encodeURIComponent(schemeHash)}`;
  }

  /** Fetch a label's SVG markup for inlining. */
  async label(experimentId: string, schemeHash: string): Promise<string> {
    const response = await this.fetchFn(this.labelUrl(experimentId, schemeHash));
    if (response.status === 404) {
      throw new ApiError(404, [], "experiment not found");
    }
    if (!response.ok) {
      throw await toApiError(response);
    }
    return await response.text();
  }
}

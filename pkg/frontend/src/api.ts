/**
 * Typed client for the recommendation service. All server interaction
 * goes through these three calls; errors carry the service's
 * machine-readable code when one is present.
 */

import type {
  Draft,
  HealthResponse,
  ModuleInfo,
  RecommendRequest,
  RecommendResponse,
} from "./types.js";

export class ServiceError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(response: Response): Promise<ServiceError> {
  let code = "unknown";
  let message = response.statusText;
  try {
    const body = (await response.json()) as { error?: { code: string; message: string } };
    if (body.error) {
      code = body.error.code;
      message = body.error.message;
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ServiceError(response.status, code, message);
}

export class ServiceClient {
  constructor(private readonly baseUrl: string) {}

  async health(): Promise<HealthResponse> {
    const response = await fetch(`${this.baseUrl}/health`);
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as HealthResponse;
  }

  async modules(): Promise<ModuleInfo[]> {
    const response = await fetch(`${this.baseUrl}/modules`);
    if (!response.ok) throw await parseError(response);
    const body = (await response.json()) as { modules: ModuleInfo[] };
    return body.modules;
  }

  async recommend(
    alertKeys: string[],
    draft: Draft,
    currentNode: string,
    k: number,
  ): Promise<RecommendResponse> {
    const request: RecommendRequest = {
      alert_keys: alertKeys,
      playbook: draft,
      current_node: currentNode,
      k,
    };
    const response = await fetch(`${this.baseUrl}/recommend`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as RecommendResponse;
  }
}

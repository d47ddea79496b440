/** Thin fetch client over the labeling service endpoints. */

import type {
  LabelResponse,
  PoolInfo,
  SessionConfig,
  SessionCreated,
  SessionStatus,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: unknown,
  ) {
    super(`HTTP ${status}: ${JSON.stringify(detail)}`);
  }
}

async function parseError(resp: Response): Promise<never> {
  let detail: unknown = resp.statusText;
  try {
    const body = (await resp.json()) as { detail?: unknown };
    if (body && body.detail !== undefined) detail = body.detail;
  } catch {
    /* non-JSON error body */
  }
  throw new ApiError(resp.status, detail);
}

export class Client {
  constructor(private base: string = "") {}

  private async get<T>(path: string): Promise<T> {
    const resp = await fetch(this.base + path);
    if (!resp.ok) return parseError(resp);
    return (await resp.json()) as T;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await fetch(this.base + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!resp.ok) return parseError(resp);
    return (await resp.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.get("/health");
  }

  listPools(): Promise<PoolInfo[]> {
    return this.get("/pools");
  }

  createSession(poolId: string, config: SessionConfig): Promise<SessionCreated> {
    return this.post("/sessions", { pool_id: poolId, config });
  }

  submitLabels(
    sessionId: string,
    labels: Array<{ id: number; label: 0 | 1 }>,
  ): Promise<LabelResponse> {
    return this.post(`/sessions/${sessionId}/labels`, { labels });
  }

  status(sessionId: string): Promise<SessionStatus> {
    return this.get(`/sessions/${sessionId}`);
  }

  async runlog(sessionId: string): Promise<string> {
    const resp = await fetch(`${this.base}/sessions/${sessionId}/runlog`);
    if (!resp.ok) return parseError(resp);
    return resp.text();
  }
}

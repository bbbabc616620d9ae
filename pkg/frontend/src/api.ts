import {
  ApiClient,
  ApiError,
  CreateResponse,
  FeedbackResponse,
  SessionConfig,
  StateResponse,
  SummaryResponse,
} from "./types.js";

async function asJson<T>(resp: Response): Promise<T> {
  let body: unknown = null;
  try {
    body = await resp.json();
  } catch {
    // fall through: non-JSON error body
  }
  if (!resp.ok) {
    const doc = (body ?? {}) as { error?: string; message?: string };
    throw new ApiError(resp.status, doc.error ?? "http_error", doc.message ?? resp.statusText);
  }
  return body as T;
}

export class HttpApiClient implements ApiClient {
  constructor(private baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  createSession(config: SessionConfig): Promise<CreateResponse> {
    return fetch(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(config),
    }).then((r) => asJson<CreateResponse>(r));
  }

  getSummary(sessionId: string): Promise<SummaryResponse> {
    return fetch(`${this.baseUrl}/sessions/${sessionId}/summary`).then((r) =>
      asJson<SummaryResponse>(r),
    );
  }

  postFeedback(sessionId: string, summaryId: string, f: number): Promise<FeedbackResponse> {
    return fetch(`${this.baseUrl}/sessions/${sessionId}/feedback`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ summary_id: summaryId, f }),
    }).then((r) => asJson<FeedbackResponse>(r));
  }

  getState(sessionId: string): Promise<StateResponse> {
    return fetch(`${this.baseUrl}/sessions/${sessionId}/state`).then((r) =>
      asJson<StateResponse>(r),
    );
  }
}

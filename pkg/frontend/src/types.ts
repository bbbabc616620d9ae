// Wire types for the session service. The UI renders these verbatim and
// never derives numbers of its own.

export interface SessionConfig {
  products?: string[];
  seed?: number;
  mode?: "gumbel" | "deterministic";
  [key: string]: unknown;
}

export interface CreateResponse {
  session_id: string;
  round: number;
  w_hat: number[];
}

export interface SelectedSentence {
  sentence_id: number;
  text: string;
  aspect: number;
  bin: string;
}

export interface SummaryResponse {
  summary_id: string;
  round: number;
  product_id: string;
  final: string;
  bin_summaries: Record<string, string>;
  selected: SelectedSentence[];
  z: number[];
  w_hat: number[];
  g_cos: number;
  degraded: boolean;
  a_pref?: number;
  a_evid?: number;
}

export interface FeedbackResponse {
  round: number;
  w_hat: number[];
  f_tilde: number;
  baseline: number;
}

export interface HistoryEntry {
  round: number;
  summary_id: string;
  f: number;
}

export interface StateResponse {
  session_id: string;
  round: number;
  w_hat: number[];
  baseline: number;
  pending_summary_id: string | null;
  history: HistoryEntry[];
  created_at: string;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export interface ApiClient {
  createSession(config: SessionConfig): Promise<CreateResponse>;
  getSummary(sessionId: string): Promise<SummaryResponse>;
  postFeedback(sessionId: string, summaryId: string, f: number): Promise<FeedbackResponse>;
  getState(sessionId: string): Promise<StateResponse>;
}

// Replay of a recorded service exchange. The fake enforces the same
// pending-summary protocol as the live service (idempotent summary fetch,
// 409 on stale or duplicate feedback) but every payload it returns comes
// verbatim from the recorded fixture.

import {
  ApiClient,
  ApiError,
  CreateResponse,
  FeedbackResponse,
  SessionConfig,
  StateResponse,
  SummaryResponse,
} from "../src/types.js";

export interface RecordedRound {
  summary: SummaryResponse;
  feedback?: { f: number; response: FeedbackResponse };
}

export interface RecordedFixture {
  create: { request: SessionConfig; response: CreateResponse };
  rounds: RecordedRound[];
  duplicate_feedback: { status: number; response: { error: string; message: string } };
  state_after: StateResponse;
}

export class FakeService implements ApiClient {
  private cursor = 0;
  private pending: SummaryResponse | null = null;
  private lastFeedback: FeedbackResponse | null = null;
  readonly calls: string[] = [];

  constructor(private fixture: RecordedFixture) {}

  async createSession(_config: SessionConfig): Promise<CreateResponse> {
    this.calls.push("create");
    return structuredClone(this.fixture.create.response);
  }

  async getSummary(_sessionId: string): Promise<SummaryResponse> {
    this.calls.push("summary");
    if (this.pending) {
      return structuredClone(this.pending);
    }
    const round = this.fixture.rounds[this.cursor];
    if (!round) {
      throw new ApiError(500, "fixture_exhausted", "no more recorded rounds");
    }
    this.pending = round.summary;
    return structuredClone(round.summary);
  }

  async postFeedback(_sessionId: string, summaryId: string, _f: number): Promise<FeedbackResponse> {
    this.calls.push("feedback");
    if (!this.pending || this.pending.summary_id !== summaryId) {
      const dup = this.fixture.duplicate_feedback;
      throw new ApiError(dup.status, dup.response.error, dup.response.message);
    }
    const round = this.fixture.rounds[this.cursor];
    if (!round || !round.feedback) {
      throw new ApiError(500, "fixture_exhausted", "no recorded feedback for this round");
    }
    this.pending = null;
    this.cursor += 1;
    this.lastFeedback = round.feedback.response;
    return structuredClone(round.feedback.response);
  }

  async getState(_sessionId: string): Promise<StateResponse> {
    this.calls.push("state");
    // state mirrors the latest recorded service numbers
    const base = structuredClone(this.fixture.state_after);
    if (this.lastFeedback) {
      base.round = this.lastFeedback.round;
      base.w_hat = [...this.lastFeedback.w_hat];
    } else {
      base.round = this.fixture.create.response.round;
      base.w_hat = [...this.fixture.create.response.w_hat];
    }
    base.pending_summary_id = this.pending ? this.pending.summary_id : null;
    return base;
  }

  feedbackCount(): number {
    return this.cursor;
  }
}

// Session controller: drives the alternation "fetch summary -> rate ->
// fetch next" against the service, with one in-flight request per session
// and conflict recovery through the state endpoint.

import { ApiClient, ApiError, SessionConfig } from "./types.js";
import {
  SessionView,
  applyError,
  applyFeedback,
  applyState,
  applySummary,
  initialView,
} from "./view.js";

export class SessionController {
  private view: SessionView | null = null;
  private inflight = false;

  constructor(private api: ApiClient) {}

  get current(): SessionView | null {
    return this.view;
  }

  get busy(): boolean {
    return this.inflight;
  }

  async start(config: SessionConfig): Promise<SessionView> {
    if (this.inflight) {
      throw new Error("a request is already in flight");
    }
    this.inflight = true;
    try {
      const created = await this.api.createSession(config);
      this.view = initialView(created.session_id, created.round, created.w_hat);
      const summary = await this.api.getSummary(created.session_id);
      this.view = applySummary(this.view, summary);
      return this.view;
    } catch (err) {
      this.view = applyError(
        this.view ?? initialView("", 1, []),
        err instanceof Error ? err.message : String(err),
      );
      throw err;
    } finally {
      this.inflight = false;
    }
  }

  /** Re-fetch the pending summary (page reload / retry banner). */
  async refreshSummary(): Promise<SessionView> {
    const view = this.requireView();
    if (this.inflight) {
      return view;
    }
    this.inflight = true;
    try {
      const summary = await this.api.getSummary(view.sessionId);
      this.view = applySummary(this.requireView(), summary);
      return this.view;
    } finally {
      this.inflight = false;
    }
  }

  /**
   * Submit feedback for the pending summary and advance to the next round.
   * Duplicate clicks while a request is in flight are ignored; a conflict
   * (stale summary) refreshes from the state endpoint instead of advancing.
   */
  async rate(f: number): Promise<SessionView> {
    const view = this.requireView();
    if (this.inflight || view.summaryId === null) {
      return view;
    }
    this.inflight = true;
    try {
      const outcome = await this.api.postFeedback(view.sessionId, view.summaryId, f);
      this.view = applyFeedback(this.requireView(), outcome.round, outcome.w_hat);
      const summary = await this.api.getSummary(view.sessionId);
      this.view = applySummary(this.requireView(), summary);
      return this.view;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        const state = await this.api.getState(view.sessionId);
        this.view = applyState(this.requireView(), state);
        if (state.pending_summary_id === null) {
          const summary = await this.api.getSummary(view.sessionId);
          this.view = applySummary(this.requireView(), summary);
        }
        return this.view;
      }
      this.view = applyError(this.requireView(), err instanceof Error ? err.message : String(err));
      throw err;
    } finally {
      this.inflight = false;
    }
  }

  private requireView(): SessionView {
    if (this.view === null) {
      throw new Error("session not started");
    }
    return this.view;
  }
}

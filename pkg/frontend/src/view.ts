// Pure view model: a snapshot of everything the DOM layer draws. All
// numeric fields are copied from service responses untouched.

import { SelectedSentence, StateResponse, SummaryResponse } from "./types.js";

export interface AlignmentPoint {
  round: number;
  aPref: number;
  aEvid: number;
}

export interface SessionView {
  sessionId: string;
  round: number;
  wBars: number[];
  summaryId: string | null;
  summaryText: string;
  binSummaries: Record<string, string>;
  evidence: SelectedSentence[];
  z: number[];
  gCos: number | null;
  degraded: boolean;
  aMetrics: AlignmentPoint[];
  error: string | null;
}

export function initialView(sessionId: string, round: number, wHat: number[]): SessionView {
  return {
    sessionId,
    round,
    wBars: [...wHat],
    summaryId: null,
    summaryText: "",
    binSummaries: {},
    evidence: [],
    z: [],
    gCos: null,
    degraded: false,
    aMetrics: [],
    error: null,
  };
}

export function applySummary(view: SessionView, summary: SummaryResponse): SessionView {
  if (summary.round < view.round) {
    return view; // stale response from an earlier round: discard
  }
  const aMetrics =
    summary.a_pref !== undefined && summary.a_evid !== undefined
      ? dedupeByRound([...view.aMetrics, { round: summary.round, aPref: summary.a_pref, aEvid: summary.a_evid }])
      : view.aMetrics;
  return {
    ...view,
    round: summary.round,
    wBars: [...summary.w_hat],
    summaryId: summary.summary_id,
    summaryText: summary.final,
    binSummaries: { ...summary.bin_summaries },
    evidence: [...summary.selected],
    z: [...summary.z],
    gCos: summary.g_cos,
    degraded: summary.degraded,
    aMetrics,
    error: null,
  };
}

export function applyFeedback(view: SessionView, round: number, wHat: number[]): SessionView {
  if (round < view.round) {
    return view;
  }
  return { ...view, round, wBars: [...wHat], summaryId: null, error: null };
}

export function applyState(view: SessionView, state: StateResponse): SessionView {
  return {
    ...view,
    round: state.round,
    wBars: [...state.w_hat],
    summaryId: state.pending_summary_id,
    error: null,
  };
}

export function applyError(view: SessionView, message: string): SessionView {
  return { ...view, error: message };
}

function dedupeByRound(points: AlignmentPoint[]): AlignmentPoint[] {
  const byRound = new Map<number, AlignmentPoint>();
  for (const p of points) {
    byRound.set(p.round, p);
  }
  return [...byRound.values()].sort((a, b) => a.round - b.round);
}

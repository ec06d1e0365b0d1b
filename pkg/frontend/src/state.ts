import { EstimateResponse, QueryResponse } from "./types";

// The view model is derived purely from the latest server responses, so a
// hard refresh can rebuild it from scratch with two GETs.

export type Phase = "picking" | "answering" | "submitting" | "finished";

export interface SessionView {
  sessionId: string;
  phase: Phase;
  query: QueryResponse | null;
  estimate: EstimateResponse | null;
  likertSubmitted: boolean;
}

export function initialView(sessionId: string): SessionView {
  return {
    sessionId,
    phase: "picking",
    query: null,
    estimate: null,
    likertSubmitted: false,
  };
}

export function withQuery(view: SessionView, query: QueryResponse): SessionView {
  if (query.done) {
    return { ...view, query: null, phase: "finished" };
  }
  return { ...view, query, phase: "answering" };
}

export function submitting(view: SessionView): SessionView {
  return { ...view, phase: "submitting" };
}

export function withEstimate(view: SessionView, estimate: EstimateResponse): SessionView {
  const phase = estimate.done && view.phase !== "picking" ? "finished" : view.phase;
  return { ...view, estimate, phase };
}

export function sessionStarted(view: SessionView): SessionView {
  return { ...view, phase: "answering" };
}

export function likertDone(view: SessionView): SessionView {
  return { ...view, likertSubmitted: true };
}

export function canAnswer(view: SessionView): boolean {
  return view.phase === "answering" && view.query !== null && !view.query.done;
}

export function progressLabel(view: SessionView): string {
  if (view.estimate === null) {
    return view.query ? `query ${view.query.query_index + 1}` : "";
  }
  return `${view.estimate.query_index} / ${view.estimate.n_queries}`;
}

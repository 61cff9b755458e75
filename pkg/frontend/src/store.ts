// UI session state, derived purely from server payloads. Refreshing the page
// and re-fetching the session reconstructs an identical model; nothing here
// second-guesses the server.

import type {
  EvaluationPayload,
  Role,
  SessionPayload,
  SessionStatus,
  SnapshotDiff,
  SseEvent,
  WireMessage,
} from "./types.js";

export interface UiSessionModel {
  sessionId: string;
  scenarioId: string | null;
  role: Role;
  status: SessionStatus;
  views: Record<Role, WireMessage[]>;
  tools: SessionPayload["tools"];
  diffs: SnapshotDiff[];
  evaluation: EvaluationPayload | null;
  inlineError: string | null;
  lastEventId: number;
  needsViewRefresh: boolean;
}

export function initialModel(role: Role, session: SessionPayload): UiSessionModel {
  return {
    sessionId: session.session_id,
    scenarioId: session.scenario_id,
    role,
    status: session.status,
    views: session.views,
    tools: session.tools,
    diffs: session.latest_diff ? [session.latest_diff] : [],
    evaluation: null,
    inlineError: null,
    lastEventId: -1,
    needsViewRefresh: false,
  };
}

/** The transcript is exactly the server-computed view for the selected role. */
export function transcriptFor(model: UiSessionModel): WireMessage[] {
  return model.views[model.role] ?? [];
}

/** Input controls are enabled only while the server awaits the selected role. */
export function canSubmit(model: UiSessionModel): boolean {
  return model.status.state === "awaiting" && model.status.role === model.role;
}

export function applyEvent(model: UiSessionModel, event: SseEvent): UiSessionModel {
  const next: UiSessionModel = { ...model, lastEventId: event.id };
  switch (event.type) {
    case "message":
      // Message bodies are rendered from the role view, which the server
      // owns; the event only tells us to refresh it.
      next.needsViewRefresh = true;
      return next;
    case "snapshot_diff":
      next.diffs = [...model.diffs, event.data as SnapshotDiff];
      return next;
    case "evaluation":
      next.evaluation = event.data as EvaluationPayload;
      return next;
    case "status":
      next.status = event.data as SessionStatus;
      return next;
    default:
      return next;
  }
}

export function applyEvents(model: UiSessionModel, events: SseEvent[]): UiSessionModel {
  return events.reduce(applyEvent, model);
}

export function refreshFromSession(
  model: UiSessionModel,
  session: SessionPayload,
): UiSessionModel {
  return {
    ...model,
    status: session.status,
    views: session.views,
    tools: session.tools,
    needsViewRefresh: false,
  };
}

export function setInlineError(model: UiSessionModel, error: string | null): UiSessionModel {
  return { ...model, inlineError: error };
}

/** Headline score text once evaluation data is present. */
export function displayedScore(model: UiSessionModel): string {
  if (model.evaluation === null || model.evaluation.final_score === null) {
    return "–";
  }
  return model.evaluation.final_score.toFixed(2);
}

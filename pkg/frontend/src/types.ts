// Wire types mirroring the playground service's JSON payloads.

export type Role = "user" | "agent" | "execution_environment";

export interface ToolProperty {
  type?: string;
  description?: string;
  items?: { type: string };
}

export interface RenderedTool {
  name: string;
  description: string;
  parameters: {
    type: "object";
    properties: Record<string, ToolProperty>;
    required: string[];
  };
}

export interface TextContent {
  kind: "text";
  text: string;
}

export interface CallsContent {
  kind: "tool_calls";
  calls: Array<{
    call_id: string;
    tool_name: string;
    arguments: Record<string, unknown>;
    batch_position: number;
  }>;
}

export interface CallOutcome {
  call_id: string;
  tool_name: string;
  ok: boolean;
  result?: unknown;
  error_kind?: string;
  error_message?: string;
}

export interface ResultsContent {
  kind: "tool_results";
  results: CallOutcome[];
}

export interface WireMessage {
  turn_index: number;
  sender: Role;
  recipient: Role;
  visible_to: Role[];
  context: boolean;
  content: TextContent | CallsContent | ResultsContent;
}

export interface SessionStatus {
  state: "awaiting" | "ended";
  role?: Role | null;
  reason?: string | null;
}

export interface SessionPayload {
  session_id: string;
  scenario_id: string | null;
  status: SessionStatus;
  role_config: Record<string, string>;
  tools: RenderedTool[];
  views: Record<Role, WireMessage[]>;
  latest_diff: SnapshotDiff | null;
  turn_count: number;
}

export interface SnapshotDiff {
  turn_index: number;
  settings?: Record<string, { from: unknown; to: unknown }>;
  contacts?: DbDiff;
  messages?: DbDiff;
  reminders?: DbDiff;
  traces?: unknown[];
}

export interface DbDiff {
  added: Record<string, unknown>[];
  removed: Record<string, unknown>[];
  changed: Array<{ from: Record<string, unknown>; to: Record<string, unknown> }>;
}

export interface MilestoneNode {
  id: string;
  kind: string;
  description: string;
}

export interface EvaluationPayload {
  milestones: MilestoneNode[];
  edges: Array<[string, string]>;
  minefields: MilestoneNode[];
  minefield_edges: Array<[string, string]>;
  assignment: Record<string, number | null>;
  per_milestone: Record<string, number>;
  minefield_assignment: Record<string, number | null>;
  minefield_per_milestone: Record<string, number>;
  score_plus: number;
  score_minus: number | null;
  final_score: number | null;
}

export interface ValidationError {
  error_kind: string;
  message: string;
}

export interface SseEvent {
  id: number;
  type: string;
  data: unknown;
}

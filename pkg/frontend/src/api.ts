// Playground service client: plain fetch wrappers plus a server-sent-events
// subscription. Both the fetch implementation and the EventSource factory are
// injectable so tests can drive the client from recorded protocol fixtures.

import type { EvaluationPayload, SessionPayload, SseEvent, ValidationError } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface EventSourceLike {
  addEventListener(type: string, listener: (event: MessageEvent) => void): void;
  close(): void;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

export type InputResult =
  | { ok: true; status: unknown }
  | { ok: false; code: number; error: ValidationError | string };

export interface ApiClient {
  listScenarios(): Promise<Array<{ id: string; categories: string[] }>>;
  createSession(
    scenarioId: string,
    roleConfig: Record<string, string>,
  ): Promise<{ session_id: string; status: unknown }>;
  getSession(sessionId: string): Promise<SessionPayload>;
  postInput(sessionId: string, body: Record<string, unknown>): Promise<InputResult>;
  getEvaluation(sessionId: string): Promise<EvaluationPayload>;
  endSession(sessionId: string): Promise<void>;
  subscribe(sessionId: string, onEvent: (event: SseEvent) => void): () => void;
}

const EVENT_TYPES = ["message", "snapshot_diff", "evaluation", "status"] as const;

export function createClient(
  baseUrl: string,
  fetchImpl: FetchLike = fetch,
  eventSourceFactory?: EventSourceFactory,
): ApiClient {
  const url = (path: string) => `${baseUrl.replace(/\/$/, "")}${path}`;

  const factory: EventSourceFactory =
    eventSourceFactory ?? ((target) => new EventSource(target) as unknown as EventSourceLike);

  return {
    async listScenarios() {
      const response = await fetchImpl(url("/scenarios"));
      const payload = await response.json();
      return payload.scenarios;
    },

    async createSession(scenarioId, roleConfig) {
      const response = await fetchImpl(url("/sessions"), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ scenario_id: scenarioId, role_config: roleConfig }),
      });
      if (!response.ok) {
        throw new Error(`create session failed: ${response.status}`);
      }
      return response.json();
    },

    async getSession(sessionId) {
      const response = await fetchImpl(url(`/sessions/${sessionId}`));
      if (!response.ok) {
        throw new Error(`unknown session: ${response.status}`);
      }
      return response.json();
    },

    async postInput(sessionId, body) {
      const response = await fetchImpl(url(`/sessions/${sessionId}/input`), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      });
      const payload = await response.json();
      if (response.ok) {
        return { ok: true, status: payload.status };
      }
      return { ok: false, code: response.status, error: payload.detail };
    },

    async getEvaluation(sessionId) {
      const response = await fetchImpl(url(`/sessions/${sessionId}/evaluation`));
      return response.json();
    },

    async endSession(sessionId) {
      await fetchImpl(url(`/sessions/${sessionId}/end`), { method: "POST" });
    },

    subscribe(sessionId, onEvent) {
      const source = factory(url(`/sessions/${sessionId}/events`));
      for (const type of EVENT_TYPES) {
        source.addEventListener(type, (event) => {
          onEvent({
            id: Number((event as MessageEvent & { lastEventId?: string }).lastEventId ?? -1),
            type,
            data: JSON.parse(event.data as string),
          });
        });
      }
      return () => source.close();
    },
  };
}

/**
 * Incremental SSE parser: feed raw chunks, get completed events back plus the
 * unconsumed tail. Used when streaming over plain fetch and by the tests.
 */
export function parseSseChunk(buffer: string): { events: SseEvent[]; rest: string } {
  const events: SseEvent[] = [];
  const blocks = buffer.split("\n\n");
  const rest = blocks.pop() ?? "";
  for (const block of blocks) {
    let id = -1;
    let type = "message";
    const dataLines: string[] = [];
    for (const line of block.split("\n")) {
      if (line.startsWith("id: ")) id = Number(line.slice(4));
      else if (line.startsWith("event: ")) type = line.slice(7);
      else if (line.startsWith("data: ")) dataLines.push(line.slice(6));
    }
    if (dataLines.length > 0) {
      events.push({ id, type, data: JSON.parse(dataLines.join("\n")) });
    }
  }
  return { events, rest };
}

// DOM wiring. Everything interesting lives in the pure modules; this file
// only moves data between them and the page.

import { createClient } from "./api.js";
import { buildCallPayload, renderComposer } from "./composer.js";
import { milestonePanel } from "./dag.js";
import { renderDiff } from "./diff.js";
import {
  UiSessionModel,
  applyEvent,
  canSubmit,
  displayedScore,
  initialModel,
  refreshFromSession,
  setInlineError,
  transcriptFor,
} from "./store.js";
import { renderTranscript } from "./transcript.js";
import type { Role, ValidationError } from "./types.js";

const client = createClient(window.location.origin);

const el = (id: string): HTMLElement => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
};

let model: UiSessionModel | null = null;
let unsubscribe: (() => void) | null = null;
let pendingRefresh = false;

async function boot(): Promise<void> {
  const scenarios = await client.listScenarios();
  const select = el("scenario-select") as HTMLSelectElement;
  select.innerHTML = scenarios
    .map((s) => `<option value="${s.id}">${s.id} (${s.categories.join(",")})</option>`)
    .join("");
  el("create-session").addEventListener("click", () => {
    void createSession(select.value, (el("role-select") as HTMLSelectElement).value as Role);
  });
}

async function createSession(scenarioId: string, role: Role): Promise<void> {
  unsubscribe?.();
  const roleConfig: Record<string, string> =
    role === "agent" ? { agent: "human", user: "golden" } : { agent: "golden", user: "human" };
  const created = await client.createSession(scenarioId, roleConfig);
  const session = await client.getSession(created.session_id);
  model = initialModel(role, session);
  model.evaluation = await client.getEvaluation(created.session_id);
  unsubscribe = client.subscribe(created.session_id, (event) => {
    if (!model) return;
    model = applyEvent(model, event);
    if (model.needsViewRefresh) scheduleViewRefresh();
    render();
  });
  render();
}

function scheduleViewRefresh(): void {
  if (pendingRefresh || !model) return;
  pendingRefresh = true;
  void client.getSession(model.sessionId).then((session) => {
    pendingRefresh = false;
    if (!model) return;
    model = refreshFromSession(model, session);
    render();
  });
}

async function submitCall(toolName: string, form: HTMLFormElement): Promise<void> {
  if (!model || !canSubmit(model)) return;
  const tool = model.tools.find((t) => t.name === toolName);
  if (!tool) return;
  const values: Record<string, string> = {};
  for (const input of Array.from(form.querySelectorAll("input"))) {
    values[input.name] = input.value;
  }
  const payload = buildCallPayload(tool, values);
  if (!payload.ok) {
    model = setInlineError(model, Object.values(payload.errors).join("; "));
    render();
    return;
  }
  const result = await client.postInput(model.sessionId, {
    role: model.role,
    tool_calls: [payload.call],
  });
  if (!result.ok) {
    const detail = result.error as ValidationError;
    const text = typeof detail === "string" ? detail : `${detail.error_kind}: ${detail.message}`;
    model = setInlineError(model, text);
  } else {
    model = setInlineError(model, null);
  }
  render();
}

async function submitText(): Promise<void> {
  if (!model || !canSubmit(model)) return;
  const input = el("text-input") as HTMLInputElement;
  const body =
    model.role === "user" && input.value.trim() === "/end"
      ? { role: model.role, end: true }
      : { role: model.role, text: input.value };
  const result = await client.postInput(model.sessionId, body);
  if (result.ok) input.value = "";
  render();
}

function render(): void {
  if (!model) return;
  el("status").textContent =
    model.status.state === "ended"
      ? `ended (${model.status.reason})`
      : `awaiting ${model.status.role}`;
  el("score").textContent = `final score: ${displayedScore(model)}`;
  el("transcript").innerHTML = renderTranscript(transcriptFor(model));
  el("diffs").innerHTML = model.diffs.slice(-5).map(renderDiff).join("");

  const toolSelect = el("tool-select") as HTMLSelectElement;
  const selected = toolSelect.value;
  toolSelect.innerHTML = model.tools
    .map((t) => `<option value="${t.name}"${t.name === selected ? " selected" : ""}>${t.name}</option>`)
    .join("");
  const tool = model.tools.find((t) => t.name === (toolSelect.value || selected));
  const composer = el("composer");
  if (tool && model.role === "agent") {
    composer.innerHTML = renderComposer(tool, model.inlineError);
    const form = composer.querySelector("form");
    form?.addEventListener("submit", (event) => {
      event.preventDefault();
      void submitCall(tool.name, form);
    });
  } else {
    composer.innerHTML = model.inlineError
      ? `<div class="inline-error">${model.inlineError}</div>`
      : "";
  }
  const gate = canSubmit(model);
  (el("send-text") as HTMLButtonElement).disabled = !gate;
  composer.querySelectorAll("button").forEach((b) => ((b as HTMLButtonElement).disabled = !gate));

  if (model.evaluation) {
    const panel = milestonePanel(model.evaluation);
    el("dag").innerHTML = panel.svg;
    el("minefield-dag").innerHTML = panel.minefieldSvg ?? "";
    el("banner").textContent = panel.banner ?? "";
    el("banner").className = panel.banner ? "banner violated" : "banner";
  }
}

el("send-text").addEventListener("click", () => void submitText());
el("tool-select").addEventListener("change", () => render());
void boot();

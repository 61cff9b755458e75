// Transcript rendering over the server-provided role view. Visibility is
// never computed client side: whatever messages the server put in the view
// are exactly what gets drawn.

import type { CallOutcome, WireMessage } from "./types.js";

const escapeHtml = (text: string): string =>
  text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");

function renderOutcome(outcome: CallOutcome): string {
  if (outcome.ok) {
    return (
      `<div class="result ok" data-call="${escapeHtml(outcome.call_id)}">` +
      `<span class="tool">${escapeHtml(outcome.tool_name)}</span> ` +
      `<code>${escapeHtml(JSON.stringify(outcome.result))}</code></div>`
    );
  }
  return (
    `<div class="result error" data-call="${escapeHtml(outcome.call_id)}">` +
    `<span class="tool">${escapeHtml(outcome.tool_name)}</span> ` +
    `<span class="error-kind">${escapeHtml(outcome.error_kind ?? "")}</span>: ` +
    `<span class="error-message">${escapeHtml(outcome.error_message ?? "")}</span></div>`
  );
}

export function renderMessage(message: WireMessage): string {
  const classes = ["message", `from-${message.sender}`, `to-${message.recipient}`];
  if (message.context) classes.push("context");
  let body: string;
  if (message.content.kind === "text") {
    body = `<p>${escapeHtml(message.content.text)}</p>`;
  } else if (message.content.kind === "tool_calls") {
    body = message.content.calls
      .map(
        (call) =>
          `<div class="call"><span class="tool">${escapeHtml(call.tool_name)}</span>` +
          `<code>${escapeHtml(JSON.stringify(call.arguments))}</code></div>`,
      )
      .join("");
  } else {
    body = message.content.results.map(renderOutcome).join("");
  }
  return (
    `<article class="${classes.join(" ")}" data-turn="${message.turn_index}">` +
    `<header>#${message.turn_index} ${escapeHtml(message.sender)} → ` +
    `${escapeHtml(message.recipient)}</header>${body}</article>`
  );
}

export function renderTranscript(view: WireMessage[]): string {
  return view.map(renderMessage).join("\n");
}

/** Error outcomes visible in a view, newest last; used for inline surfacing. */
export function visibleErrors(view: WireMessage[]): CallOutcome[] {
  const errors: CallOutcome[] = [];
  for (const message of view) {
    if (message.content.kind !== "tool_results") continue;
    for (const outcome of message.content.results) {
      if (!outcome.ok) errors.push(outcome);
    }
  }
  return errors;
}

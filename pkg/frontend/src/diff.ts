// Per-turn world-state diff rendering (deltas, not full dumps).

import type { DbDiff, SnapshotDiff } from "./types.js";

const escapeHtml = (text: string): string =>
  text.replaceAll("&", "&amp;").replaceAll("<", "&lt;").replaceAll(">", "&gt;");

function renderDbDiff(name: string, diff: DbDiff): string {
  const parts: string[] = [];
  for (const row of diff.added) {
    parts.push(`<li class="added">+ ${escapeHtml(JSON.stringify(row))}</li>`);
  }
  for (const row of diff.removed) {
    parts.push(`<li class="removed">- ${escapeHtml(JSON.stringify(row))}</li>`);
  }
  for (const change of diff.changed) {
    parts.push(
      `<li class="changed">~ ${escapeHtml(JSON.stringify(change.from))} → ` +
      `${escapeHtml(JSON.stringify(change.to))}</li>`,
    );
  }
  return `<div class="db-diff"><h4>${escapeHtml(name)}</h4><ul>${parts.join("")}</ul></div>`;
}

export function renderDiff(diff: SnapshotDiff): string {
  const sections: string[] = [];
  if (diff.settings) {
    const flags = Object.entries(diff.settings)
      .map(
        ([flag, change]) =>
          `<li class="changed">${escapeHtml(flag)}: ` +
          `${escapeHtml(String(change.from))} → ${escapeHtml(String(change.to))}</li>`,
      )
      .join("");
    sections.push(`<div class="db-diff"><h4>settings</h4><ul>${flags}</ul></div>`);
  }
  for (const db of ["contacts", "messages", "reminders"] as const) {
    const dbDiff = diff[db];
    if (dbDiff) sections.push(renderDbDiff(db, dbDiff));
  }
  if (sections.length === 0) {
    return `<div class="diff empty" data-turn="${diff.turn_index}">no world-state change</div>`;
  }
  return `<div class="diff" data-turn="${diff.turn_index}">${sections.join("")}</div>`;
}

// Schema-driven tool-call composer: one input control per declared argument,
// typed when the wire schema carries a kind, free-form when types were
// scrambled away. The server stays authoritative; its 422 validation errors
// are rendered inline exactly as an agent would see them.

import type { RenderedTool, ToolProperty } from "./types.js";

export interface ComposerField {
  name: string;
  kind: string | null; // null when the presented schema omitted the type
  required: boolean;
  description: string;
}

export function composerFields(tool: RenderedTool): ComposerField[] {
  const required = new Set(tool.parameters.required);
  return Object.entries(tool.parameters.properties).map(([name, property]) => ({
    name,
    kind: propertyKind(property),
    required: required.has(name),
    description: property.description ?? "",
  }));
}

function propertyKind(property: ToolProperty): string | null {
  if (!property.type) {
    return null;
  }
  if (property.type === "array") {
    return "array";
  }
  return property.type;
}

export type ParsedValue =
  | { ok: true; value: unknown }
  | { ok: false; error: string };

export function parseFieldValue(field: ComposerField, raw: string): ParsedValue {
  const text = raw.trim();
  switch (field.kind) {
    case "number":
    case "timestamp":
    case "latitude":
    case "longitude": {
      const value = Number(text);
      if (text === "" || Number.isNaN(value)) {
        return { ok: false, error: `'${field.name}' must be a number` };
      }
      return { ok: true, value };
    }
    case "boolean": {
      if (text === "true") return { ok: true, value: true };
      if (text === "false") return { ok: true, value: false };
      return { ok: false, error: `'${field.name}' must be true or false` };
    }
    case "array": {
      try {
        const parsed = JSON.parse(text);
        if (Array.isArray(parsed)) return { ok: true, value: parsed };
      } catch {
        // fall through to comma splitting
      }
      return { ok: true, value: text.split(",").map((part) => part.trim()) };
    }
    case "object": {
      try {
        const parsed = JSON.parse(text);
        if (parsed !== null && typeof parsed === "object" && !Array.isArray(parsed)) {
          return { ok: true, value: parsed };
        }
        return { ok: false, error: `'${field.name}' must be a JSON object` };
      } catch {
        return { ok: false, error: `'${field.name}' must be valid JSON` };
      }
    }
    case "string":
      return { ok: true, value: raw };
    default: {
      // Type-scrambled: pass JSON literals through when they parse, else the
      // raw string. Wrong guesses surface as server-side 422s.
      try {
        return { ok: true, value: JSON.parse(text) };
      } catch {
        return { ok: true, value: raw };
      }
    }
  }
}

export type CallPayload =
  | { ok: true; call: { tool_name: string; arguments: Record<string, unknown> } }
  | { ok: false; errors: Record<string, string> };

export function buildCallPayload(
  tool: RenderedTool,
  values: Record<string, string>,
): CallPayload {
  const argumentsMap: Record<string, unknown> = {};
  const errors: Record<string, string> = {};
  for (const field of composerFields(tool)) {
    const raw = values[field.name] ?? "";
    if (raw.trim() === "") {
      if (field.required) {
        errors[field.name] = `'${field.name}' is required`;
      }
      continue;
    }
    const parsed = parseFieldValue(field, raw);
    if (!parsed.ok) {
      errors[field.name] = parsed.error;
    } else {
      argumentsMap[field.name] = parsed.value;
    }
  }
  if (Object.keys(errors).length > 0) {
    return { ok: false, errors };
  }
  return { ok: true, call: { tool_name: tool.name, arguments: argumentsMap } };
}

const escapeHtml = (text: string): string =>
  text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");

export function renderComposer(tool: RenderedTool, inlineError: string | null = null): string {
  const fields = composerFields(tool)
    .map((field) => {
      const marker = field.required ? '<span class="required">*</span>' : "";
      const kind = field.kind === null ? "free-form" : field.kind;
      const hint = field.description ? escapeHtml(field.description) : "";
      return `
  <label class="composer-field" data-field="${escapeHtml(field.name)}">
    <span class="field-name">${escapeHtml(field.name)}${marker}</span>
    <span class="field-kind">${escapeHtml(kind)}</span>
    <input name="${escapeHtml(field.name)}" placeholder="${hint}" />
  </label>`;
    })
    .join("\n");
  const errorBlock = inlineError
    ? `<div class="inline-error">${escapeHtml(inlineError)}</div>`
    : "";
  return `
<form class="composer" data-tool="${escapeHtml(tool.name)}">
  <div class="composer-title">${escapeHtml(tool.name)}</div>
  <div class="composer-description">${escapeHtml(tool.description)}</div>
${fields}
${errorBlock}
  <button type="submit">Call tool</button>
</form>`;
}

// Milestone DAG layout and SVG rendering: nodes layered by topological depth,
// colored by score (unmatched / partial / matched), each linked to the
// transcript turn its assignment landed on.

import type { EvaluationPayload, MilestoneNode } from "./types.js";

export type NodeState = "unmatched" | "partial" | "matched" | "violated";

export interface LaidOutNode {
  id: string;
  kind: string;
  description: string;
  score: number;
  turn: number | null;
  state: NodeState;
  x: number;
  y: number;
}

export interface LaidOutEdge {
  from: string;
  to: string;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface DagLayout {
  nodes: LaidOutNode[];
  edges: LaidOutEdge[];
  width: number;
  height: number;
}

const NODE_W = 150;
const NODE_H = 44;
const GAP_X = 60;
const GAP_Y = 18;

export function scoreState(score: number): NodeState {
  if (score >= 1.0) return "matched";
  if (score > 0.0) return "partial";
  return "unmatched";
}

export function topologicalLayers(
  ids: string[],
  edges: Array<[string, string]>,
): Map<string, number> {
  const layer = new Map<string, number>();
  const remaining = new Set(ids);
  while (remaining.size > 0) {
    let progressed = false;
    for (const id of ids) {
      if (!remaining.has(id)) continue;
      const parents = edges.filter(([, to]) => to === id).map(([from]) => from);
      if (parents.every((parent) => layer.has(parent))) {
        const depth = parents.length
          ? Math.max(...parents.map((parent) => layer.get(parent) ?? 0)) + 1
          : 0;
        layer.set(id, depth);
        remaining.delete(id);
        progressed = true;
      }
    }
    if (!progressed) {
      throw new Error("milestone graph contains a cycle");
    }
  }
  return layer;
}

export function layoutDag(
  nodes: MilestoneNode[],
  edges: Array<[string, string]>,
  scores: Record<string, number>,
  assignment: Record<string, number | null>,
  violated = false,
): DagLayout {
  const ids = nodes.map((node) => node.id);
  const layers = topologicalLayers(ids, edges);
  const byLayer = new Map<number, string[]>();
  for (const id of ids) {
    const depth = layers.get(id) ?? 0;
    byLayer.set(depth, [...(byLayer.get(depth) ?? []), id]);
  }
  const laidOut: LaidOutNode[] = nodes.map((node) => {
    const depth = layers.get(node.id) ?? 0;
    const siblings = byLayer.get(depth) ?? [node.id];
    const row = siblings.indexOf(node.id);
    const score = scores[node.id] ?? 0;
    return {
      id: node.id,
      kind: node.kind,
      description: node.description,
      score,
      turn: assignment[node.id] ?? null,
      state: violated && score > 0 ? "violated" : scoreState(score),
      x: depth * (NODE_W + GAP_X),
      y: row * (NODE_H + GAP_Y),
    };
  });
  const positions = new Map(laidOut.map((node) => [node.id, node]));
  const laidOutEdges: LaidOutEdge[] = edges.map(([from, to]) => {
    const a = positions.get(from);
    const b = positions.get(to);
    if (!a || !b) throw new Error(`edge (${from}, ${to}) references an unknown node`);
    return {
      from,
      to,
      x1: a.x + NODE_W,
      y1: a.y + NODE_H / 2,
      x2: b.x,
      y2: b.y + NODE_H / 2,
    };
  });
  const width = Math.max(...laidOut.map((n) => n.x + NODE_W), NODE_W) + 10;
  const height = Math.max(...laidOut.map((n) => n.y + NODE_H), NODE_H) + 10;
  return { nodes: laidOut, edges: laidOutEdges, width, height };
}

const escapeXml = (text: string): string =>
  text.replaceAll("&", "&amp;").replaceAll("<", "&lt;").replaceAll(">", "&gt;");

export function renderDagSvg(layout: DagLayout): string {
  const edges = layout.edges
    .map(
      (edge) =>
        `<line class="dag-edge" x1="${edge.x1}" y1="${edge.y1}" ` +
        `x2="${edge.x2}" y2="${edge.y2}" marker-end="url(#arrow)"/>`,
    )
    .join("");
  const nodes = layout.nodes
    .map((node) => {
      const turn = node.turn === null ? "" : `turn ${node.turn}`;
      return (
        `<g class="dag-node state-${node.state}" data-id="${escapeXml(node.id)}" ` +
        `data-turn="${node.turn ?? ""}">` +
        `<rect x="${node.x}" y="${node.y}" width="${NODE_W}" height="${NODE_H}" rx="6"/>` +
        `<text x="${node.x + 8}" y="${node.y + 18}">${escapeXml(node.id)} ` +
        `(${node.score.toFixed(2)})</text>` +
        `<text x="${node.x + 8}" y="${node.y + 34}" class="dag-turn">${turn}</text>` +
        `</g>`
      );
    })
    .join("");
  return (
    `<svg viewBox="0 0 ${layout.width} ${layout.height}" width="${layout.width}" ` +
    `height="${layout.height}">` +
    `<defs><marker id="arrow" markerWidth="8" markerHeight="8" refX="8" refY="4" ` +
    `orient="auto"><path d="M0,0 L8,4 L0,8 z"/></marker></defs>` +
    edges +
    nodes +
    `</svg>`
  );
}

export interface MilestonePanel {
  svg: string;
  minefieldSvg: string | null;
  banner: string | null;
  finalScore: number | null;
}

export function milestonePanel(evaluation: EvaluationPayload): MilestonePanel {
  const violated = (evaluation.score_minus ?? 0) > 0;
  const layout = layoutDag(
    evaluation.milestones,
    evaluation.edges,
    evaluation.per_milestone,
    evaluation.assignment,
  );
  let minefieldSvg: string | null = null;
  let banner: string | null = null;
  if (evaluation.minefields.length > 0) {
    const mineLayout = layoutDag(
      evaluation.minefields,
      evaluation.minefield_edges,
      evaluation.minefield_per_milestone,
      evaluation.minefield_assignment,
      violated,
    );
    minefieldSvg = renderDagSvg(mineLayout);
  }
  if (violated) {
    const hit = evaluation.minefields.find(
      (node) => (evaluation.minefield_per_milestone[node.id] ?? 0) > 0,
    );
    const turn = hit ? evaluation.minefield_assignment[hit.id] : null;
    banner = `final score 0 — minefield${hit ? ` '${hit.id}'` : ""} violated` +
      (turn !== null && turn !== undefined ? ` at turn ${turn}` : "");
  }
  return {
    svg: renderDagSvg(layout),
    minefieldSvg,
    banner,
    finalScore: evaluation.final_score,
  };
}

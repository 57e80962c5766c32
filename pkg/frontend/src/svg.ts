// SVG rendering for the tree view.
//
// renderTree is a pure string builder over (document, view state, badges):
// no DOM required, so the exact same inputs produce the exact same markup.
// The app shell mounts the string and wires events by element id.

import { layoutTree, pathToRoot, type TreeLayout } from "./layout.js";
import {
  escapeXml,
  probabilityStrokeWidth,
  rgbCss,
  sentimentColor,
  visibleText,
  wordlistColor,
} from "./colors.js";
import { badgeMatchedNodeIds, visibleTextNodeIds, type ViewState } from "./viewstate.js";
import type { BadgeMap, TreeDocument, TreeNode } from "./types.js";

export interface RenderStats {
  nodeCount: number;
  edgeCount: number;
  loopEdgeCount: number;
  textCount: number;
}

export interface RenderedTree {
  svg: string;
  stats: RenderStats;
  layout: TreeLayout;
}

const EDGE_BASE = "#9aa0a6";
const HEAD_COLOR = "#1a73e8";
const NODE_FILL = "#ffffff";
const NODE_STROKE = "#5f6368";

function nodeLabel(node: TreeNode): string {
  return visibleText(node.text);
}

function nodeFill(node: TreeNode, view: ViewState): string {
  if (view.toggles.semanticNodeFill) {
    const kw = node.annotations?.keywords;
    if (kw && kw.length > 0 && kw[0]) {
      const [r, g, b] = kw[0].color;
      // soften toward white so the label stays readable
      return rgbCss([
        Math.round(r + (255 - r) * 0.55),
        Math.round(g + (255 - g) * 0.55),
        Math.round(b + (255 - b) * 0.55),
      ]);
    }
  }
  return NODE_FILL;
}

function edgeColor(child: TreeNode, view: ViewState): string {
  const sentiment = child.annotations?.sentiment;
  if (view.toggles.sentimentEdges && sentiment) {
    return rgbCss(sentimentColor(sentiment.score));
  }
  return EDGE_BASE;
}

function edgePath(x1: number, y1: number, x2: number, y2: number): string {
  const mx = (x1 + x2) / 2;
  return `M ${x1} ${y1} C ${mx} ${y1}, ${mx} ${y2}, ${x2} ${y2}`;
}

export function renderTree(
  tree: TreeDocument,
  view: ViewState,
  badges: BadgeMap = {},
): RenderedTree {
  const layout = layoutTree(tree);
  const textIds = visibleTextNodeIds(tree, view, badges);
  const matched = badgeMatchedNodeIds(tree, badges, view.selectedWordlists);
  const hoverPath = new Set<number>(
    view.hoveredNodeId !== null && layout.nodes.has(view.hoveredNodeId)
      ? pathToRoot(tree, view.hoveredNodeId)
      : [],
  );
  const treeBadges = badges[tree.tree_id] ?? {};

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${layout.width}" height="${layout.height}" ` +
      `viewBox="0 0 ${layout.width} ${layout.height}" data-tree="${escapeXml(tree.tree_id)}">`,
  );

  let edgeCount = 0;
  for (const e of layout.edges) {
    const child = layout.nodes.get(e.to)!.node;
    const width = view.toggles.probabilityStroke ? probabilityStrokeWidth(e.condProb) : 1.5;
    const onPath = hoverPath.has(e.from) && hoverPath.has(e.to);
    const color = onPath ? HEAD_COLOR : edgeColor(child, view);
    parts.push(
      `<path d="${edgePath(e.x1, e.y1, e.x2, e.y2)}" fill="none" stroke="${color}" ` +
        `stroke-width="${width.toFixed(2)}" data-edge="${e.from}-${e.to}"${onPath ? ' data-hover-path="1"' : ""}/>`,
    );
    edgeCount += 1;
  }

  let loopEdgeCount = 0;
  for (const loop of layout.loopEdges) {
    const from = layout.nodes.get(loop.from);
    const to = layout.nodes.get(loop.to);
    if (!from || !to) continue;
    // dotted back-link arcing above the straight edges
    const lift = Math.min(from.y, to.y) - 18;
    parts.push(
      `<path d="M ${from.x} ${from.y} C ${from.x} ${lift}, ${to.x} ${lift}, ${to.x} ${to.y}" ` +
        `fill="none" stroke="${EDGE_BASE}" stroke-width="1.25" stroke-dasharray="2 3" ` +
        `data-loop="${loop.from}-${loop.to}"/>`,
    );
    loopEdgeCount += 1;
  }

  let textCount = 0;
  const ordered = [...layout.nodes.values()].sort((a, b) => a.node.node_id - b.node.node_id);
  for (const p of ordered) {
    const id = p.node.node_id;
    const radius = p.isHead ? 7 : 5;
    const stroke = p.isHead || hoverPath.has(id) ? HEAD_COLOR : NODE_STROKE;
    parts.push(
      `<circle cx="${p.x}" cy="${p.y}" r="${radius}" fill="${nodeFill(p.node, view)}" ` +
        `stroke="${stroke}" stroke-width="${p.isHead ? 2.5 : 1.25}" data-node="${id}"/>`,
    );
    if (p.isHead) {
      parts.push(
        `<text x="${p.x}" y="${p.y - 12}" text-anchor="middle" font-size="9" ` +
          `fill="${HEAD_COLOR}" data-head-marker="1">HEAD</text>`,
      );
    }
    if (textIds.has(id)) {
      parts.push(
        `<text x="${p.x + 10}" y="${p.y + 4}" font-size="12" data-node-text="${id}"` +
          `${matched.has(id) && view.toggles.wordlistColors ? ' font-weight="bold"' : ""}>` +
          `${escapeXml(nodeLabel(p.node))}</text>`,
      );
      textCount += 1;
    }
    if (view.toggles.wordlistColors) {
      const nodeBadges = treeBadges[String(id)] ?? {};
      let slot = 0;
      view.selectedWordlists.forEach((listName, listIndex) => {
        if (!(listName in nodeBadges)) return;
        parts.push(
          `<rect x="${p.x - 4 + slot * 9}" y="${p.y + 8}" width="7" height="7" rx="1.5" ` +
            `fill="${wordlistColor(listIndex)}" ` +
            `data-badge="${id}:${escapeXml(listName)}"/>`,
        );
        slot += 1;
      });
    }
  }

  parts.push("</svg>");
  return {
    svg: parts.join(""),
    stats: { nodeCount: layout.nodes.size, edgeCount, loopEdgeCount, textCount },
    layout,
  };
}

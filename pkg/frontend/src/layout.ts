// Left-to-right node-link layout for a beam tree.
//
// Depth maps to the x axis; leaves get consecutive rows top-to-bottom in
// child order and inner nodes center on their children. Pure function of
// the document, so a fixed tree renders to identical coordinates every
// time (row order comes from the server's child lists, not from object
// iteration).

import type { TreeDocument, TreeNode } from "./types.js";

export interface PlacedNode {
  node: TreeNode;
  depth: number;
  x: number;
  y: number;
  cumLogProb: number;
  isHead: boolean;
  onHeadPath: boolean;
}

export interface PlacedEdge {
  from: number;
  to: number;
  condProb: number;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface LoopEdge {
  from: number;
  to: number;
}

export interface TreeLayout {
  nodes: Map<number, PlacedNode>;
  edges: PlacedEdge[];
  loopEdges: LoopEdge[];
  width: number;
  height: number;
}

export const COLUMN_WIDTH = 160;
export const ROW_HEIGHT = 34;
export const MARGIN = 24;

export function layoutTree(tree: TreeDocument): TreeLayout {
  const byId = new Map<number, TreeNode>(tree.nodes.map((n) => [n.node_id, n]));
  const placed = new Map<number, PlacedNode>();

  const headPath = new Set<number>();
  for (let cur: number | null = tree.head; cur !== null; ) {
    headPath.add(cur);
    const node = byId.get(cur);
    cur = node ? node.parent : null;
  }

  let nextRow = 0;
  let maxDepth = 0;

  const place = (nodeId: number, depth: number, cumLogProb: number): number => {
    const node = byId.get(nodeId);
    if (!node) throw new Error(`tree ${tree.tree_id} references missing node ${nodeId}`);
    maxDepth = Math.max(maxDepth, depth);

    let y: number;
    if (node.children.length === 0) {
      y = nextRow++;
    } else {
      const childYs = node.children.map((c) =>
        place(c, depth + 1, cumLogProb + Math.log(byId.get(c)?.cond_prob ?? 1)),
      );
      y = (childYs[0]! + childYs[childYs.length - 1]!) / 2;
    }
    placed.set(nodeId, {
      node,
      depth,
      x: MARGIN + depth * COLUMN_WIDTH,
      y,
      cumLogProb,
      isHead: nodeId === tree.head,
      onHeadPath: headPath.has(nodeId),
    });
    return y;
  };
  place(tree.root, 0, 0);

  // rows to pixels
  for (const p of placed.values()) {
    p.y = MARGIN + p.y * ROW_HEIGHT;
  }

  const edges: PlacedEdge[] = [];
  for (const p of placed.values()) {
    for (const childId of p.node.children) {
      const child = placed.get(childId);
      if (!child) continue;
      edges.push({
        from: p.node.node_id,
        to: childId,
        condProb: child.node.cond_prob,
        x1: p.x,
        y1: p.y,
        x2: child.x,
        y2: child.y,
      });
    }
  }

  const loopEdges: LoopEdge[] = tree.loop_links.map(([from, to]) => ({ from, to }));

  return {
    nodes: placed,
    edges,
    loopEdges,
    width: 2 * MARGIN + (maxDepth + 1) * COLUMN_WIDTH,
    height: 2 * MARGIN + Math.max(1, nextRow) * ROW_HEIGHT,
  };
}

/** Node ids along the root -> node path, for hover path highlighting. */
export function pathToRoot(tree: TreeDocument, nodeId: number): number[] {
  const byId = new Map<number, TreeNode>(tree.nodes.map((n) => [n.node_id, n]));
  const path: number[] = [];
  for (let cur: number | null = nodeId; cur !== null; ) {
    path.push(cur);
    const node = byId.get(cur);
    if (!node) break;
    cur = node.parent;
  }
  return path.reverse();
}

// 2D embedding map of annotated keywords.
//
// Every annotated node contributes its keywords at the server-provided
// 2D coordinates. Hovering a node in the tree filters the map to that
// node's keywords; the overlay labels the strongest keywords so the map
// stays readable at a glance.

import { escapeXml, rgbCss } from "./colors.js";
import type { TreeDocument } from "./types.js";
import type { ViewState } from "./viewstate.js";

export interface MapPoint {
  treeId: string;
  nodeId: number;
  surface: string;
  score: number;
  x: number;
  y: number;
  color: [number, number, number];
}

export function collectKeywords(trees: TreeDocument[]): MapPoint[] {
  const points: MapPoint[] = [];
  for (const tree of trees) {
    for (const node of tree.nodes) {
      for (const kw of node.annotations?.keywords ?? []) {
        points.push({
          treeId: tree.tree_id,
          nodeId: node.node_id,
          surface: kw.surface,
          score: kw.score,
          x: kw.coords[0],
          y: kw.coords[1],
          color: kw.color,
        });
      }
    }
  }
  return points;
}

const MAP_MARGIN = 18;

function projector(
  points: MapPoint[],
  width: number,
  height: number,
): (x: number, y: number) => [number, number] {
  let minX = Infinity;
  let minY = Infinity;
  let maxX = -Infinity;
  let maxY = -Infinity;
  for (const p of points) {
    minX = Math.min(minX, p.x);
    minY = Math.min(minY, p.y);
    maxX = Math.max(maxX, p.x);
    maxY = Math.max(maxY, p.y);
  }
  const spanX = maxX - minX || 1;
  const spanY = maxY - minY || 1;
  return (x, y) => [
    MAP_MARGIN + ((x - minX) / spanX) * (width - 2 * MAP_MARGIN),
    MAP_MARGIN + ((y - minY) / spanY) * (height - 2 * MAP_MARGIN),
  ];
}

export interface EmbeddingMapOptions {
  width?: number;
  height?: number;
  labelCount?: number;
}

export function renderEmbeddingMap(
  trees: TreeDocument[],
  view: ViewState,
  options: EmbeddingMapOptions = {},
): { svg: string; points: MapPoint[] } {
  const width = options.width ?? 320;
  const height = options.height ?? 260;
  const labelCount = options.labelCount ?? 8;

  const points = collectKeywords(trees);
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" data-embedding-map="1">`,
  );

  if (points.length > 0) {
    const project = projector(points, width, height);
    const hovering = view.hoveredNodeId !== null;

    for (const p of points) {
      const [px, py] = project(p.x, p.y);
      const active = !hovering || p.nodeId === view.hoveredNodeId;
      parts.push(
        `<circle cx="${px.toFixed(2)}" cy="${py.toFixed(2)}" r="${active && hovering ? 5 : 3.5}" ` +
          `fill="${rgbCss(p.color)}" opacity="${active ? "0.95" : "0.18"}" ` +
          `data-map-point="${escapeXml(p.treeId)}:${p.nodeId}:${escapeXml(p.surface)}"/>`,
      );
    }

    // keyword overlay: strongest first, one label per surface form
    const labeled = new Set<string>();
    const byScore = [...points].sort(
      (a, b) => b.score - a.score || a.surface.localeCompare(b.surface),
    );
    for (const p of byScore) {
      if (labeled.size >= labelCount) break;
      if (labeled.has(p.surface)) continue;
      if (hovering && p.nodeId !== view.hoveredNodeId) continue;
      labeled.add(p.surface);
      const [px, py] = project(p.x, p.y);
      parts.push(
        `<text x="${(px + 6).toFixed(2)}" y="${(py - 5).toFixed(2)}" font-size="10" ` +
          `data-map-label="${escapeXml(p.surface)}">${escapeXml(p.surface)}</text>`,
      );
    }
  }

  parts.push("</svg>");
  return { svg: parts.join(""), points };
}

// Voronoi treemap via additively weighted power diagrams.
//
// Each layer partitions its parent cell so that cell areas are
// proportional to item weights. Cells are intersections of half-planes:
// site i keeps x with 2(p_j - p_i) . x <= |p_j|^2 - |p_i|^2 + w_i - w_j
// for every j, clipped against the parent polygon. Iteration alternates
// Lloyd-style centroid moves with additive weight adaptation until the
// worst per-cell area error drops under the tolerance. All randomness
// comes from a seeded generator, so a fixed seed gives a fixed layout.

import type { LayerKind, OntologyPayload } from "./types.js";

export type Point = [number, number];
export type Polygon = Point[];

export interface WeightedItem {
  id: string;
  label: string;
  weight: number;
}

export interface VoronoiCell {
  id: string;
  label: string;
  weight: number;
  polygon: Polygon;
  site: Point;
  area: number;
}

export interface TreemapOptions {
  tolerance?: number;
  maxIterations?: number;
  restarts?: number;
}

const DEFAULTS: Required<TreemapOptions> = {
  tolerance: 0.02,
  maxIterations: 800,
  restarts: 6,
};

// ── geometry ─────────────────────────────────────────────────────────

export function polygonArea(poly: Polygon): number {
  let twice = 0;
  for (let i = 0; i < poly.length; i++) {
    const [x1, y1] = poly[i]!;
    const [x2, y2] = poly[(i + 1) % poly.length]!;
    twice += x1 * y2 - x2 * y1;
  }
  return Math.abs(twice) / 2;
}

export function polygonCentroid(poly: Polygon): Point {
  let twice = 0;
  let cx = 0;
  let cy = 0;
  for (let i = 0; i < poly.length; i++) {
    const [x1, y1] = poly[i]!;
    const [x2, y2] = poly[(i + 1) % poly.length]!;
    const cross = x1 * y2 - x2 * y1;
    twice += cross;
    cx += (x1 + x2) * cross;
    cy += (y1 + y2) * cross;
  }
  if (Math.abs(twice) < 1e-12) {
    // degenerate sliver: fall back to vertex mean
    let sx = 0;
    let sy = 0;
    for (const [x, y] of poly) {
      sx += x;
      sy += y;
    }
    return [sx / poly.length, sy / poly.length];
  }
  return [cx / (3 * twice), cy / (3 * twice)];
}

/** Keep the part of `poly` with a*x + b*y <= c (Sutherland-Hodgman). */
export function clipHalfPlane(poly: Polygon, a: number, b: number, c: number): Polygon {
  const out: Polygon = [];
  for (let i = 0; i < poly.length; i++) {
    const p = poly[i]!;
    const q = poly[(i + 1) % poly.length]!;
    const dp = a * p[0] + b * p[1] - c;
    const dq = a * q[0] + b * q[1] - c;
    if (dp <= 0) out.push(p);
    if ((dp < 0 && dq > 0) || (dp > 0 && dq < 0)) {
      const t = dp / (dp - dq);
      out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
    }
  }
  return out;
}

export function computePowerCells(
  sites: Point[],
  weights: number[],
  boundary: Polygon,
): Polygon[] {
  return sites.map((pi, i) => {
    let cell = boundary;
    const wi = weights[i]!;
    for (let j = 0; j < sites.length && cell.length >= 3; j++) {
      if (j === i) continue;
      const pj = sites[j]!;
      const a = 2 * (pj[0] - pi[0]);
      const b = 2 * (pj[1] - pi[1]);
      const c =
        pj[0] * pj[0] + pj[1] * pj[1] - pi[0] * pi[0] - pi[1] * pi[1] + wi - weights[j]!;
      cell = clipHalfPlane(cell, a, b, c);
    }
    return cell.length >= 3 ? cell : [];
  });
}

// ── seeded randomness ────────────────────────────────────────────────

export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function hashString(text: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  return h >>> 0;
}

function pointInPolygon(poly: Polygon, x: number, y: number): boolean {
  let inside = false;
  for (let i = 0, j = poly.length - 1; i < poly.length; j = i++) {
    const [xi, yi] = poly[i]!;
    const [xj, yj] = poly[j]!;
    if (yi > y !== yj > y && x < ((xj - xi) * (y - yi)) / (yj - yi) + xi) {
      inside = !inside;
    }
  }
  return inside;
}

function samplePoint(poly: Polygon, rand: () => number): Point {
  let minX = Infinity;
  let minY = Infinity;
  let maxX = -Infinity;
  let maxY = -Infinity;
  for (const [x, y] of poly) {
    minX = Math.min(minX, x);
    minY = Math.min(minY, y);
    maxX = Math.max(maxX, x);
    maxY = Math.max(maxY, y);
  }
  for (let tries = 0; tries < 200; tries++) {
    const x = minX + rand() * (maxX - minX);
    const y = minY + rand() * (maxY - minY);
    if (pointInPolygon(poly, x, y)) return [x, y];
  }
  // convex cells keep the centroid interior; blend toward a vertex for spread
  const c = polygonCentroid(poly);
  const v = poly[Math.floor(rand() * poly.length)]!;
  const t = 0.3 * rand();
  return [c[0] + t * (v[0] - c[0]), c[1] + t * (v[1] - c[1])];
}

// ── single-layer solver ──────────────────────────────────────────────

export function areaErrors(areas: number[], fractions: number[], total: number): number[] {
  return areas.map((area, i) => Math.abs(area - fractions[i]! * total) / (fractions[i]! * total));
}

function solveOnce(
  items: WeightedItem[],
  boundary: Polygon,
  rand: () => number,
  opts: Required<TreemapOptions>,
): { cells: Polygon[]; sites: Point[]; error: number } {
  const total = polygonArea(boundary);
  const weightSum = items.reduce((s, it) => s + it.weight, 0);
  const fractions = items.map((it) => it.weight / weightSum);
  const n = items.length;

  const sites: Point[] = [];
  for (let i = 0; i < n; i++) sites.push(samplePoint(boundary, rand));
  let weights = new Array<number>(n).fill(0);

  let best: { cells: Polygon[]; sites: Point[]; error: number } = {
    cells: computePowerCells(sites, weights, boundary),
    sites: sites.map((s) => [...s] as Point),
    error: Infinity,
  };

  for (let iter = 0; iter < opts.maxIterations; iter++) {
    // keep every cell nonempty: with nonnegative weights, any pair obeys
    // w_j - w_i <= 0.96 d(i,j)^2 < d(i,j)^2, so every site stays inside
    // its own cell
    const minW = Math.min(...weights);
    weights = weights.map((w) => w - minW);
    for (let i = 0; i < n; i++) {
      let dmin = Infinity;
      for (let j = 0; j < n; j++) {
        if (j === i) continue;
        const dx = sites[i]![0] - sites[j]![0];
        const dy = sites[i]![1] - sites[j]![1];
        dmin = Math.min(dmin, dx * dx + dy * dy);
      }
      if (Number.isFinite(dmin)) {
        weights[i] = Math.min(weights[i]!, 0.96 * dmin);
      }
    }

    const cells = computePowerCells(sites, weights, boundary);
    let relocated = false;
    for (let i = 0; i < n; i++) {
      if (cells[i]!.length < 3 || polygonArea(cells[i]!) < total * 1e-9) {
        sites[i] = samplePoint(boundary, rand);
        weights[i] = 0;
        relocated = true;
      }
    }
    if (relocated) continue;

    const areas = cells.map((c) => polygonArea(c));
    const error = Math.max(...areaErrors(areas, fractions, total));
    if (error < best.error) {
      best = { cells, sites: sites.map((s) => [...s] as Point), error };
    }
    if (error <= opts.tolerance) break;

    for (let i = 0; i < n; i++) {
      sites[i] = polygonCentroid(cells[i]!);
      weights[i] = weights[i]! + 0.8 * (fractions[i]! * total - areas[i]!);
    }
  }
  return best;
}

/**
 * Partition `boundary` into one cell per item, areas proportional to
 * weights within `tolerance` relative error. Deterministic for a fixed
 * seed; retries with derived seeds when a start fails to converge.
 */
export function layoutCells(
  items: WeightedItem[],
  boundary: Polygon,
  seed: number,
  options: TreemapOptions = {},
): VoronoiCell[] {
  const opts = { ...DEFAULTS, ...options };
  const positive = items.filter((it) => it.weight > 0);
  if (positive.length === 0) return [];
  if (positive.length === 1) {
    const it = positive[0]!;
    return [
      {
        id: it.id,
        label: it.label,
        weight: it.weight,
        polygon: boundary,
        site: polygonCentroid(boundary),
        area: polygonArea(boundary),
      },
    ];
  }

  let best: { cells: Polygon[]; sites: Point[]; error: number } | null = null;
  for (let attempt = 0; attempt < opts.restarts; attempt++) {
    const rand = mulberry32((seed + attempt * 0x9e3779b9) >>> 0);
    const result = solveOnce(positive, boundary, rand, opts);
    if (best === null || result.error < best.error) best = result;
    if (best.error <= opts.tolerance) break;
  }

  return positive.map((it, i) => ({
    id: it.id,
    label: it.label,
    weight: it.weight,
    polygon: best!.cells[i]!,
    site: best!.sites[i]!,
    area: polygonArea(best!.cells[i]!),
  }));
}

// ── hierarchical treemap over the ontology payload ───────────────────

export const LAYER_ORDER: LayerKind[] = ["domain", "subdomain", "synset", "keyword"];

export interface TreemapLayer {
  kind: LayerKind;
  cells: VoronoiCell[];
}

export function rectPolygon(width: number, height: number): Polygon {
  return [
    [0, 0],
    [width, 0],
    [width, height],
    [0, height],
  ];
}

export function ontologyTreemap(
  ontology: OntologyPayload,
  width: number,
  height: number,
  seed: number,
  options: TreemapOptions = {},
): TreemapLayer[] {
  const layers: TreemapLayer[] = [];
  let parents = new Map<string | null, Polygon>([[null, rectPolygon(width, height)]]);

  for (const kind of LAYER_ORDER) {
    const cells: VoronoiCell[] = [];
    const groups = new Map<string | null, WeightedItem[]>();
    for (const cell of ontology[kind]) {
      const key = cell.parent;
      if (!groups.has(key)) groups.set(key, []);
      groups.get(key)!.push({ id: cell.cell_id, label: cell.label, weight: cell.weight });
    }
    const sortedParents = [...groups.keys()].sort((a, b) =>
      (a ?? "").localeCompare(b ?? ""),
    );
    for (const parentId of sortedParents) {
      const boundary = parents.get(parentId);
      if (!boundary || boundary.length < 3) continue;
      const groupSeed = (seed ^ hashString(`${kind}:${parentId ?? ""}`)) >>> 0;
      cells.push(...layoutCells(groups.get(parentId)!, boundary, groupSeed, options));
    }
    layers.push({ kind, cells });
    parents = new Map(cells.map((c) => [c.id, c.polygon]));
  }
  return layers;
}

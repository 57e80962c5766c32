import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import {
  clipHalfPlane,
  layoutCells,
  mulberry32,
  ontologyTreemap,
  polygonArea,
  polygonCentroid,
  rectPolygon,
  LAYER_ORDER,
  type Polygon,
  type WeightedItem,
} from "../src/voronoi.js";
import type { OntologyPayload } from "../src/types.js";

const FIXTURES = join(__dirname, "..", "fixtures");
const TOLERANCE = 0.02;

function loadOntology(): OntologyPayload {
  return JSON.parse(readFileSync(join(FIXTURES, "ontology-fixture.json"), "utf-8"));
}

function relativeAreaErrors(
  cells: { area: number; weight: number }[],
  boundaryArea: number,
): number[] {
  const weightSum = cells.reduce((s, c) => s + c.weight, 0);
  return cells.map((cell) => {
    const target = (cell.weight / weightSum) * boundaryArea;
    return Math.abs(cell.area - target) / target;
  });
}

describe("polygon primitives", () => {
  it("measures rectangles exactly", () => {
    expect(polygonArea(rectPolygon(10, 4))).toBeCloseTo(40, 10);
    expect(polygonCentroid(rectPolygon(10, 4))).toEqual([5, 2]);
  });

  it("clips a square by a half-plane", () => {
    const half = clipHalfPlane(rectPolygon(2, 2), 1, 0, 1); // keep x <= 1
    expect(polygonArea(half)).toBeCloseTo(2, 10);
    for (const [x] of half) expect(x).toBeLessThanOrEqual(1 + 1e-12);
  });

  it("returns an empty polygon when everything is cut away", () => {
    expect(clipHalfPlane(rectPolygon(2, 2), 1, 0, -1)).toEqual([]);
  });
});

describe("single-layer treemap", () => {
  it("hits the 2% area tolerance on uneven weights", () => {
    const items: WeightedItem[] = [1, 2, 3, 5, 8, 13, 21].map((w, i) => ({
      id: `item-${i}`,
      label: `item-${i}`,
      weight: w,
    }));
    const boundary = rectPolygon(400, 300);
    const cells = layoutCells(items, boundary, 7);
    expect(cells.length).toBe(items.length);
    for (const err of relativeAreaErrors(cells, polygonArea(boundary))) {
      expect(err).toBeLessThanOrEqual(TOLERANCE);
    }
  });

  it("partitions the boundary completely", () => {
    const items: WeightedItem[] = [3, 1, 4, 1, 5].map((w, i) => ({
      id: `p-${i}`,
      label: `p-${i}`,
      weight: w,
    }));
    const boundary = rectPolygon(200, 200);
    const cells = layoutCells(items, boundary, 11);
    const covered = cells.reduce((s, c) => s + c.area, 0);
    expect(covered).toBeCloseTo(polygonArea(boundary), 4);
  });

  it("converges across random weight draws", () => {
    for (const seed of [1, 2, 3, 4, 5]) {
      const rand = mulberry32(seed * 1000 + 17);
      const items: WeightedItem[] = Array.from({ length: 12 }, (_, i) => ({
        id: `r-${i}`,
        label: `r-${i}`,
        weight: 1 + Math.floor(rand() * 9),
      }));
      const boundary = rectPolygon(360, 300);
      const cells = layoutCells(items, boundary, seed);
      for (const err of relativeAreaErrors(cells, polygonArea(boundary))) {
        expect(err).toBeLessThanOrEqual(TOLERANCE);
      }
    }
  });

  it("gives a lone item the whole boundary", () => {
    const boundary = rectPolygon(50, 50);
    const cells = layoutCells(
      [{ id: "only", label: "only", weight: 3 }],
      boundary,
      1,
    );
    expect(cells.length).toBe(1);
    expect(cells[0]!.area).toBeCloseTo(2500, 10);
  });

  it("is deterministic for a fixed seed", () => {
    const items: WeightedItem[] = [2, 3, 4].map((w, i) => ({
      id: `d-${i}`,
      label: `d-${i}`,
      weight: w,
    }));
    const a = layoutCells(items, rectPolygon(100, 100), 42);
    const b = layoutCells(items, rectPolygon(100, 100), 42);
    expect(JSON.stringify(a)).toBe(JSON.stringify(b));
  });
});

describe("hierarchical ontology treemap", () => {
  it("keeps every layer's cell areas within 2% of its weights", () => {
    const ontology = loadOntology();
    const layers = ontologyTreemap(ontology, 360, 300, 20260814);
    expect(layers.map((l) => l.kind)).toEqual(LAYER_ORDER);

    let parentPolygons = new Map<string | null, Polygon>([
      [null, rectPolygon(360, 300)],
    ]);
    for (const layer of layers) {
      expect(layer.cells.length).toBeGreaterThan(0);
      const cellsById = new Map(layer.cells.map((c) => [c.id, c]));
      const groups = new Map<string | null, typeof layer.cells>();
      for (const cell of ontology[layer.kind]) {
        const placed = cellsById.get(cell.cell_id);
        expect(placed, `cell ${cell.cell_id} placed`).toBeDefined();
        if (!groups.has(cell.parent)) groups.set(cell.parent, []);
        groups.get(cell.parent)!.push(placed!);
      }
      for (const [parent, cells] of groups) {
        const boundary = parentPolygons.get(parent);
        expect(boundary, `parent ${parent} has a polygon`).toBeDefined();
        for (const err of relativeAreaErrors(cells, polygonArea(boundary!))) {
          expect(err).toBeLessThanOrEqual(TOLERANCE);
        }
      }
      parentPolygons = new Map(layer.cells.map((c) => [c.id, c.polygon]));
    }
  });

  it("nests children inside their parent cell", () => {
    const ontology = loadOntology();
    const layers = ontologyTreemap(ontology, 360, 300, 20260814);
    const parentArea = new Map(layers[0]!.cells.map((c) => [c.id, c.area]));
    const childSums = new Map<string, number>();
    const parentOf = new Map(ontology.subdomain.map((c) => [c.cell_id, c.parent]));
    for (const cell of layers[1]!.cells) {
      const parent = parentOf.get(cell.id);
      if (typeof parent === "string") {
        childSums.set(parent, (childSums.get(parent) ?? 0) + cell.area);
      }
    }
    for (const [parent, sum] of childSums) {
      expect(sum).toBeCloseTo(parentArea.get(parent)!, 4);
    }
  });

  it("reproduces the identical layout for the same seed", () => {
    const ontology = loadOntology();
    const a = ontologyTreemap(ontology, 360, 300, 99);
    const b = ontologyTreemap(ontology, 360, 300, 99);
    expect(JSON.stringify(a)).toBe(JSON.stringify(b));
  });
});

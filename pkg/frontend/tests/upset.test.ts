import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { layoutUpset, renderUpset } from "../src/upset.js";
import type { UpSetPayload } from "../src/types.js";

const FIXTURES = join(__dirname, "..", "fixtures");

function loadUpset(): UpSetPayload {
  return JSON.parse(readFileSync(join(FIXTURES, "upset-fixture.json"), "utf-8"));
}

const SYNTHETIC: UpSetPayload = {
  columns: [
    {
      member_trees: ["t-b"],
      lists: { colors: [{ word: "red", count: 1 }] },
    },
    {
      member_trees: ["t-a", "t-b"],
      lists: {
        colors: [
          { word: "green", count: 3 },
          { word: "blue", count: 2 },
        ],
      },
    },
    {
      member_trees: ["t-a"],
      lists: { sizes: [{ word: "tall", count: 2 }] },
    },
  ],
};

describe("upset layout", () => {
  it("orders columns by total count, descending", () => {
    const layout = layoutUpset(SYNTHETIC);
    expect(layout.columns.map((c) => c.total)).toEqual([5, 2, 1]);
    expect(layout.columns[0]!.memberTrees).toEqual(["t-a", "t-b"]);
    expect(layout.rows).toEqual(["t-a", "t-b"]);
  });

  it("flattens list entries per column with their list name", () => {
    const layout = layoutUpset(SYNTHETIC);
    expect(layout.columns[0]!.words).toEqual([
      { list: "colors", word: "green", count: 3 },
      { list: "colors", word: "blue", count: 2 },
    ]);
  });

  it("renders one bar per column and one dot per row and column", () => {
    const { svg, layout } = renderUpset(SYNTHETIC);
    expect((svg.match(/data-upset-bar/g) ?? []).length).toBe(layout.columns.length);
    expect((svg.match(/data-upset-dot/g) ?? []).length).toBe(
      layout.columns.length * layout.rows.length,
    );
  });

  it("links the member dots of multi-tree columns", () => {
    const { svg } = renderUpset(SYNTHETIC);
    expect((svg.match(/data-upset-link/g) ?? []).length).toBe(1);
  });

  it("handles the recorded comparative fixture", () => {
    const payload = loadUpset();
    const { svg, layout } = renderUpset(payload);
    expect(layout.columns.length).toBe(payload.columns.length);
    expect(layout.columns.length).toBeGreaterThan(0);
    const shared = layout.columns.find((c) => c.memberTrees.length === 2);
    expect(shared).toBeDefined();
    const words = shared!.words.map((w) => w.word).sort();
    expect(words).toEqual(["lawyer", "nurse"]);
    expect(svg).toContain("data-upset-bar");
  });

  it("is deterministic", () => {
    expect(renderUpset(SYNTHETIC).svg).toBe(renderUpset(SYNTHETIC).svg);
  });
});

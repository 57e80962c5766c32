// UpSet-style intersection view over shared wordlist hits.
//
// Each column is a set of member trees; the bar counts every word
// occurrence shared by exactly that set, and the dot matrix below marks
// the members. Columns sort by total count (descending, then by member
// key) so the layout is stable for a fixed payload.

import { escapeXml } from "./colors.js";
import type { UpSetPayload } from "./types.js";

export interface UpSetColumnLayout {
  memberTrees: string[];
  total: number;
  words: { list: string; word: string; count: number }[];
}

export interface UpSetLayout {
  rows: string[];
  columns: UpSetColumnLayout[];
}

export function layoutUpset(payload: UpSetPayload): UpSetLayout {
  const rows = new Set<string>();
  const columns: UpSetColumnLayout[] = payload.columns.map((col) => {
    for (const tree of col.member_trees) rows.add(tree);
    const words: UpSetColumnLayout["words"] = [];
    for (const list of Object.keys(col.lists).sort()) {
      for (const entry of col.lists[list] ?? []) {
        words.push({ list, word: entry.word, count: entry.count });
      }
    }
    return {
      memberTrees: [...col.member_trees].sort(),
      total: words.reduce((s, w) => s + w.count, 0),
      words,
    };
  });
  columns.sort(
    (a, b) => b.total - a.total || a.memberTrees.join(",").localeCompare(b.memberTrees.join(",")),
  );
  return { rows: [...rows].sort(), columns };
}

const COL_WIDTH = 34;
const ROW_HEIGHT = 22;
const BAR_AREA = 90;
const LABEL_AREA = 120;
const DOT_R = 6;

export function renderUpset(payload: UpSetPayload): { svg: string; layout: UpSetLayout } {
  const layout = layoutUpset(payload);
  const { rows, columns } = layout;
  const width = LABEL_AREA + Math.max(1, columns.length) * COL_WIDTH + 12;
  const height = BAR_AREA + Math.max(1, rows.length) * ROW_HEIGHT + 28;
  const maxTotal = Math.max(1, ...columns.map((c) => c.total));

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" data-upset="1">`,
  );

  columns.forEach((col, ci) => {
    const cx = LABEL_AREA + ci * COL_WIDTH + COL_WIDTH / 2;
    const barH = (col.total / maxTotal) * (BAR_AREA - 18);
    parts.push(
      `<rect x="${cx - 9}" y="${(BAR_AREA - barH).toFixed(2)}" width="18" ` +
        `height="${barH.toFixed(2)}" fill="#5b8def" data-upset-bar="${ci}"/>`,
    );
    parts.push(
      `<text x="${cx}" y="${BAR_AREA - barH - 4 < 10 ? 10 : (BAR_AREA - barH - 4).toFixed(2)}" ` +
        `text-anchor="middle" font-size="10" data-upset-count="${ci}">${col.total}</text>`,
    );

    const memberYs: number[] = [];
    rows.forEach((tree, ri) => {
      const cy = BAR_AREA + 14 + ri * ROW_HEIGHT;
      const member = col.memberTrees.includes(tree);
      if (member) memberYs.push(cy);
      parts.push(
        `<circle cx="${cx}" cy="${cy}" r="${DOT_R}" ` +
          `fill="${member ? "#30363d" : "#d8dee4"}" data-upset-dot="${ci}:${ri}"/>`,
      );
    });
    if (memberYs.length > 1) {
      parts.push(
        `<line x1="${cx}" y1="${memberYs[0]}" x2="${cx}" y2="${memberYs[memberYs.length - 1]}" ` +
          `stroke="#30363d" stroke-width="2.5" data-upset-link="${ci}"/>`,
      );
    }
  });

  rows.forEach((tree, ri) => {
    const cy = BAR_AREA + 14 + ri * ROW_HEIGHT;
    parts.push(
      `<text x="${LABEL_AREA - 8}" y="${cy + 4}" text-anchor="end" font-size="11" ` +
        `data-upset-row="${ri}">${escapeXml(tree.slice(0, 14))}</text>`,
    );
  });

  parts.push("</svg>");
  return { svg: parts.join(""), layout };
}

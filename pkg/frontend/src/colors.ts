// Color scales and text proxies shared by the tree view and widgets.

export type Rgb = [number, number, number];

const NEGATIVE: Rgb = [203, 67, 53]; // red
const NEUTRAL: Rgb = [149, 152, 154]; // gray
const POSITIVE: Rgb = [39, 150, 80]; // green

function mix(a: Rgb, b: Rgb, t: number): Rgb {
  return [
    Math.round(a[0] + (b[0] - a[0]) * t),
    Math.round(a[1] + (b[1] - a[1]) * t),
    Math.round(a[2] + (b[2] - a[2]) * t),
  ];
}

/** Diverging red-gray-green scale over sentiment score in [-1, 1]. */
export function sentimentColor(score: number): Rgb {
  const s = Math.max(-1, Math.min(1, score));
  return s < 0 ? mix(NEUTRAL, NEGATIVE, -s) : mix(NEUTRAL, POSITIVE, s);
}

export function rgbCss([r, g, b]: Rgb): string {
  return `rgb(${r},${g},${b})`;
}

/** Edge stroke width from the conditional probability of following it. */
export function probabilityStrokeWidth(condProb: number): number {
  const p = Math.max(0, Math.min(1, condProb));
  return 0.75 + 5.25 * p;
}

// Deterministic qualitative palette for wordlist badge colors.
const WORDLIST_PALETTE = [
  "#1f77b4",
  "#ff7f0e",
  "#2ca02c",
  "#d62728",
  "#9467bd",
  "#8c564b",
  "#e377c2",
  "#7f7f7f",
];

export function wordlistColor(index: number): string {
  return WORDLIST_PALETTE[index % WORDLIST_PALETTE.length]!;
}

// Control characters rendered as visible proxies so whitespace-only
// continuations stay inspectable.
const PROXIES: Record<string, string> = {
  "\n": "↵", // down-left arrow
  "\t": "⇥", // tab arrow
  "\r": "␍", // CR symbol
  "\0": "␀",
};

export function visibleText(text: string): string {
  let out = "";
  for (const ch of text) {
    const proxy = PROXIES[ch];
    if (proxy !== undefined) {
      out += proxy;
    } else if (ch.charCodeAt(0) < 0x20) {
      // remaining C0 controls map into the Control Pictures block
      out += String.fromCharCode(0x2400 + ch.charCodeAt(0));
    } else {
      out += ch;
    }
  }
  return out;
}

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

// View state: what is shown, never what is true. Level-of-detail and
// style toggles only affect rendering; all tree content comes from the
// service verbatim.

import type { BadgeMap, TreeDocument } from "./types.js";

export type LevelOfDetail = "full" | "collapsed" | "semi-collapsed";

export interface StyleToggles {
  sentimentEdges: boolean;
  semanticNodeFill: boolean;
  probabilityStroke: boolean;
  wordlistColors: boolean;
}

export interface ViewState {
  activeTreeIds: string[];
  detail: LevelOfDetail;
  toggles: StyleToggles;
  selectedWordlists: string[];
  colormap: string;
  hoveredNodeId: number | null;
  layoutSeed: number;
}

export function defaultViewState(): ViewState {
  return {
    activeTreeIds: [],
    detail: "full",
    toggles: {
      sentimentEdges: false,
      semanticNodeFill: false,
      probabilityStroke: true,
      wordlistColors: false,
    },
    selectedWordlists: [],
    colormap: "quadrant-blend",
    hoveredNodeId: null,
    layoutSeed: 1,
  };
}

/** Node ids of one tree that carry a badge for any selected wordlist. */
export function badgeMatchedNodeIds(
  tree: TreeDocument,
  badges: BadgeMap,
  selectedWordlists: string[],
): Set<number> {
  const matched = new Set<number>();
  const perNode = badges[tree.tree_id];
  if (!perNode) return matched;
  for (const [nodeId, lists] of Object.entries(perNode)) {
    for (const name of Object.keys(lists)) {
      if (selectedWordlists.includes(name)) {
        matched.add(Number(nodeId));
        break;
      }
    }
  }
  return matched;
}

// Level-of-detail contract:
//   full            every node shows its text
//   collapsed       no node text at all, structure only
//   semi-collapsed  exactly the badge-matching nodes show text
export function visibleTextNodeIds(
  tree: TreeDocument,
  state: ViewState,
  badges: BadgeMap,
): Set<number> {
  if (state.detail === "full") {
    return new Set(tree.nodes.map((n) => n.node_id));
  }
  if (state.detail === "collapsed") {
    return new Set();
  }
  return badgeMatchedNodeIds(tree, badges, state.selectedWordlists);
}

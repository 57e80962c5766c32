"""Beam search tree: nodes, scores, HEAD selection, view filters, edits,
loop detection, and canonical byte-stable serialization.

Scores are natural-log cumulative probabilities (underflow-safe on long
beams).  cum_logprob and depth are derived fields, recomputed from
cond_prob whenever structure or probabilities change; serialized files
store cond_prob only.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .backends.base import Backend, Token
from .errors import (
    CannotRemoveRootError,
    EmptyPromptError,
    EndNotLeafError,
    InvalidParameterError,
    MalformedTreeError,
    SchemaVersionError,
    StartEndConflictError,
    UnknownNodeError,
    ZeroProbabilityError,
)

TREE_FORMAT = "beamtree.tree"
TREE_VERSION = 1


@dataclass
class KeywordRecord:
    """One extracted keyword on a node, with its semantic placement."""

    surface: str
    score: float
    embedding: list[float] = field(default_factory=list)
    coords: tuple[float, float] | None = None
    color: tuple[int, int, int] | None = None


@dataclass
class SentimentRecord:
    label: str
    score: float
    # set when the provider failed and the neutral fallback was used
    warning: bool = False


@dataclass
class NodeAnnotations:
    keywords: list[KeywordRecord] = field(default_factory=list)
    sentiment: SentimentRecord | None = None


@dataclass
class BeamNode:
    """One emission of the beam search (or an edited span).

    ``text`` carries its own leading separator when the backend convention
    requires one, so sequence text is plain concatenation.  ``cond_prob``
    is the model probability of this node following its parent (1.0 for
    the root); ``stale`` marks probabilities invalidated by an upstream
    edit, cleared when a later prediction recomputes them.
    """

    node_id: int
    parent: int | None
    tokens: list[Token]
    text: str
    cond_prob: float
    children: list[int] = field(default_factory=list)
    stale: bool = False
    annotations: NodeAnnotations | None = None
    cum_logprob: float = 0.0
    depth: int = 0

    def is_root(self) -> bool:
        return self.parent is None


@dataclass
class BeamTree:
    tree_id: str
    prompt: str
    nodes: dict[int, BeamNode]
    root: int = 0
    head: int = 0
    start_override: int | None = None
    end_override: int | None = None
    params_used: dict | None = None
    backend_id: str | None = None
    loop_links: list[tuple[int, int]] = field(default_factory=list)
    next_node_id: int = 1
    # comparative trees record the substituted slot for UI highlighting
    replacement: str | None = None
    replacement_span: tuple[int, int] | None = None

    # --- basic access ---

    def node(self, node_id: int) -> BeamNode:
        if node_id not in self.nodes:
            raise UnknownNodeError(f"no node {node_id} in tree {self.tree_id}")
        return self.nodes[node_id]

    def path_to(self, node_id: int) -> list[BeamNode]:
        """Nodes from root to ``node_id`` inclusive."""
        chain = []
        cursor: int | None = node_id
        while cursor is not None:
            n = self.node(cursor)
            chain.append(n)
            cursor = n.parent
        chain.reverse()
        return chain

    def path_tokens(self, node_id: int) -> list[Token]:
        tokens: list[Token] = []
        for n in self.path_to(node_id):
            tokens.extend(n.tokens)
        return tokens

    def subtree_ids(self, node_id: int) -> list[int]:
        """Ids of ``node_id`` and all descendants, preorder."""
        self.node(node_id)
        out = []
        stack = [node_id]
        while stack:
            nid = stack.pop()
            out.append(nid)
            stack.extend(reversed(self.nodes[nid].children))
        return out

    def is_ancestor(self, ancestor: int, node_id: int) -> bool:
        """True when ``ancestor`` is ``node_id`` or above it."""
        cursor: int | None = node_id
        while cursor is not None:
            if cursor == ancestor:
                return True
            cursor = self.nodes[cursor].parent
        return False

    def displayed_root(self) -> int:
        return self.start_override if self.start_override is not None else self.root

    def displayed_ids(self) -> list[int]:
        return self.subtree_ids(self.displayed_root())

    def leaves(self, within: Iterable[int] | None = None) -> list[BeamNode]:
        ids = list(within) if within is not None else list(self.nodes)
        return [self.nodes[i] for i in ids if not self.nodes[i].children]

    # --- score maintenance ---

    def recompute_scores(self) -> None:
        """Rederive cum_logprob and depth for every node from cond_prob."""
        root = self.nodes[self.root]
        root.cum_logprob = 0.0
        root.depth = 0
        stack = [self.root]
        while stack:
            nid = stack.pop()
            n = self.nodes[nid]
            for cid in n.children:
                c = self.nodes[cid]
                c.cum_logprob = n.cum_logprob + math.log(c.cond_prob)
                c.depth = n.depth + 1
                stack.append(cid)

    def validate(self) -> None:
        """Structural invariants: single root, tree-shaped, consistent scores."""
        root = self.nodes.get(self.root)
        if root is None or root.parent is not None or root.cond_prob != 1.0:
            raise MalformedTreeError("bad root node")
        seen: set[int] = set()
        stack = [self.root]
        while stack:
            nid = stack.pop()
            if nid in seen:
                raise MalformedTreeError(f"node {nid} reachable twice (cycle)")
            seen.add(nid)
            n = self.nodes[nid]
            if len(set(n.children)) != len(n.children):
                raise MalformedTreeError(f"duplicate children on node {nid}")
            for cid in n.children:
                if self.nodes[cid].parent != nid:
                    raise MalformedTreeError(f"parent pointer mismatch at {cid}")
                stack.append(cid)
        if seen != set(self.nodes):
            raise MalformedTreeError("unreachable nodes present")
        for n in self.nodes.values():
            if not 0.0 <= n.cond_prob <= 1.0:
                raise MalformedTreeError(f"cond_prob out of range on {n.node_id}")
            if n.parent is not None:
                expected = self.nodes[n.parent].cum_logprob + math.log(n.cond_prob)
                if abs(n.cum_logprob - expected) >= 1e-12:
                    raise MalformedTreeError(f"score drift on node {n.node_id}")


def create_tree(
    prompt: str,
    backend: Backend | None = None,
    tree_id: str | None = None,
) -> BeamTree:
    """Single-root tree whose root text is the prompt.

    Root tokens are filled when a backend is given; otherwise the first
    prediction tokenizes the prompt lazily.
    """
    if not prompt.strip():
        raise EmptyPromptError("prompt must be non-empty")
    tokens = backend.tokenize(prompt) if backend is not None else []
    if tree_id is None:
        tree_id = "t-" + hashlib.sha256(prompt.encode()).hexdigest()[:12]
    root = BeamNode(node_id=0, parent=None, tokens=tokens, text=prompt, cond_prob=1.0)
    backend_id = backend.describe().backend_id if backend is not None else None
    return BeamTree(
        tree_id=tree_id, prompt=prompt, nodes={0: root}, backend_id=backend_id
    )


def append_children(
    tree: BeamTree,
    parent_id: int,
    candidates: Sequence[tuple[Token, float]],
    texts: Sequence[str] | None = None,
) -> list[int]:
    """Materialize one beam expansion: children appended in candidate order.

    ``texts`` optionally overrides each child's surface string (used to
    carry the backend's separator convention); default is the token text.
    Returns the new node ids.
    """
    parent = tree.node(parent_id)
    if not candidates:
        raise InvalidParameterError("candidates must be non-empty")
    if texts is not None and len(texts) != len(candidates):
        raise InvalidParameterError("texts must parallel candidates")
    for token, prob in candidates:
        if prob <= 0.0:
            raise ZeroProbabilityError(
                f"candidate {token.text!r} has probability {prob}; ln undefined"
            )
        if prob > 1.0:
            raise InvalidParameterError("probability above 1")
    new_ids = []
    for i, (token, prob) in enumerate(candidates):
        nid = tree.next_node_id
        tree.next_node_id += 1
        text = texts[i] if texts is not None else token.text
        child = BeamNode(
            node_id=nid,
            parent=parent_id,
            tokens=[token],
            text=text,
            cond_prob=prob,
            cum_logprob=parent.cum_logprob + math.log(prob),
            depth=parent.depth + 1,
        )
        tree.nodes[nid] = child
        parent.children.append(nid)
        new_ids.append(nid)
    return new_ids


def select_head(tree: BeamTree) -> int:
    """HEAD = end override if set, else the best displayed leaf.

    Comparator (documented order): depth first, cumulative log-probability
    second, smallest node id third.
    """
    if tree.end_override is not None:
        tree.head = tree.end_override
        return tree.head
    leaves = tree.leaves(tree.displayed_ids())
    best = max(leaves, key=lambda n: (n.depth, n.cum_logprob, -n.node_id))
    tree.head = best.node_id
    return tree.head


def set_start_node(tree: BeamTree, node_id: int | None) -> None:
    if node_id is None:
        tree.start_override = None
        select_head(tree)
        return
    tree.node(node_id)
    if tree.end_override is not None and not tree.is_ancestor(node_id, tree.end_override):
        raise StartEndConflictError(
            f"start {node_id} is not an ancestor of end {tree.end_override}"
        )
    tree.start_override = node_id
    select_head(tree)


def set_end_node(tree: BeamTree, node_id: int | None) -> None:
    if node_id is None:
        tree.end_override = None
        select_head(tree)
        return
    n = tree.node(node_id)
    if n.children:
        raise EndNotLeafError(f"node {node_id} is not a leaf")
    if tree.start_override is not None and not tree.is_ancestor(tree.start_override, node_id):
        raise StartEndConflictError(
            f"end {node_id} is outside the subtree of start {tree.start_override}"
        )
    tree.end_override = node_id
    tree.head = node_id


def edit_node(tree: BeamTree, node_id: int, new_text: str, backend: Backend) -> None:
    """Replace a node's text, marking it and all descendants stale.

    Editing to the identical text only clears the node's stale flag (a
    cheap "confirm" gesture); probabilities stay valid in that case.
    """
    n = tree.node(node_id)
    if not new_text:
        raise InvalidParameterError("new_text must be non-empty")
    if new_text == n.text:
        n.stale = False
        return
    n.tokens = backend.tokenize(new_text)
    n.text = new_text
    if n.is_root():
        tree.prompt = new_text
    for nid in tree.subtree_ids(node_id):
        sub = tree.nodes[nid]
        sub.stale = True
        sub.annotations = None


def remove_subtree(tree: BeamTree, node_id: int) -> None:
    n = tree.node(node_id)
    if n.is_root():
        raise CannotRemoveRootError("cannot remove the root node")
    doomed = set(tree.subtree_ids(node_id))
    tree.nodes[n.parent].children.remove(node_id)
    for nid in doomed:
        del tree.nodes[nid]
    tree.loop_links = [
        (a, b) for a, b in tree.loop_links if a not in doomed and b not in doomed
    ]
    if tree.start_override in doomed:
        tree.start_override = None
    if tree.end_override in doomed:
        tree.end_override = None
    if tree.head in doomed:
        select_head(tree)


def sequence_text(tree: BeamTree, node_id: int) -> str:
    """Raw concatenation of node texts from the displayed root to the node."""
    path = tree.path_to(node_id)
    start = tree.start_override
    if start is not None:
        for i, n in enumerate(path):
            if n.node_id == start:
                path = path[i:]
                break
    return "".join(n.text for n in path)


# --- loop detection ----------------------------------------------------------


def _is_primitive(block: Sequence[str]) -> bool:
    """True when the block is not itself a repetition of a shorter block."""
    p = len(block)
    for q in range(1, p):
        if p % q == 0 and all(block[t] == block[t % q] for t in range(p)):
            return False
    return True


def _maximal_runs(
    texts: Sequence[str], min_cycle: int, min_repeats: int
) -> list[tuple[int, int]]:
    """(start, period) of every maximal immediately-repeating block.

    A run is an interval with primitive period p that cannot be extended
    left or right and covers at least min_repeats full blocks.
    """
    n = len(texts)
    runs = []
    for p in range(max(1, min_cycle), n // min_repeats + 1):
        i = 0
        while i + p < n:
            if texts[i] != texts[i + p]:
                i += 1
                continue
            # grow the matching interval [start, j) with period p
            start = i
            j = i + p
            while j < n and texts[j] == texts[j - p]:
                j += 1
            if (j - start) // p >= min_repeats and _is_primitive(
                texts[start : start + p]
            ):
                runs.append((start, p))
            i = j - p + 1
    return runs


def detect_loops(
    tree: BeamTree, min_cycle_nodes: int = 1, min_repeats: int = 2
) -> list[tuple[int, int]]:
    """Annotate immediately-repeating node-text blocks along root-to-leaf paths.

    Each maximal run yields one back link from the last node of the first
    block occurrence to the block's first node.  Links are deduplicated and
    stored on the tree sorted by (from, to).
    """
    if min_cycle_nodes < 1:
        raise InvalidParameterError("min_cycle_nodes must be >= 1")
    if min_repeats < 2:
        raise InvalidParameterError("min_repeats must be >= 2")
    links: set[tuple[int, int]] = set()
    for leaf in tree.leaves():
        path = tree.path_to(leaf.node_id)
        texts = [n.text for n in path]
        for start, period in _maximal_runs(texts, min_cycle_nodes, min_repeats):
            links.add((path[start + period - 1].node_id, path[start].node_id))
    tree.loop_links = sorted(links)
    return tree.loop_links


# --- canonical serialization --------------------------------------------------


def _annotations_payload(ann: NodeAnnotations | None) -> dict | None:
    if ann is None:
        return None
    return {
        "keywords": [
            {
                "surface": k.surface,
                "score": k.score,
                "embedding": k.embedding,
                "coords": list(k.coords) if k.coords is not None else None,
                "color": list(k.color) if k.color is not None else None,
            }
            for k in ann.keywords
        ],
        "sentiment": (
            {
                "label": ann.sentiment.label,
                "score": ann.sentiment.score,
                "warning": ann.sentiment.warning,
            }
            if ann.sentiment is not None
            else None
        ),
    }


def serialize(tree: BeamTree) -> bytes:
    """Canonical tree file: versioned JSON, fixed field order, one per line-less
    compact document, UTF-8, trailing newline.  Byte-stable for equal trees."""
    payload = {
        "format": TREE_FORMAT,
        "version": TREE_VERSION,
        "tree_id": tree.tree_id,
        "prompt": tree.prompt,
        "replacement": tree.replacement,
        "replacement_span": (
            list(tree.replacement_span) if tree.replacement_span is not None else None
        ),
        "backend_id": tree.backend_id,
        "params_used": tree.params_used,
        "root": tree.root,
        "head": tree.head,
        "start_override": tree.start_override,
        "end_override": tree.end_override,
        "next_node_id": tree.next_node_id,
        "loop_links": [list(link) for link in tree.loop_links],
        "nodes": [
            {
                "node_id": n.node_id,
                "parent": n.parent,
                "token_ids": [t.id for t in n.tokens],
                "token_texts": [t.text for t in n.tokens],
                "text": n.text,
                "cond_prob": n.cond_prob,
                "stale": n.stale,
                "children": list(n.children),
                "annotations": _annotations_payload(n.annotations),
            }
            for _, n in sorted(tree.nodes.items())
        ],
    }
    return (json.dumps(payload, separators=(",", ":"), ensure_ascii=False) + "\n").encode()


def _parse_annotations(payload: dict | None) -> NodeAnnotations | None:
    if payload is None:
        return None
    keywords = [
        KeywordRecord(
            surface=k["surface"],
            score=float(k["score"]),
            embedding=[float(x) for x in k["embedding"]],
            coords=tuple(k["coords"]) if k["coords"] is not None else None,
            color=tuple(k["color"]) if k["color"] is not None else None,
        )
        for k in payload["keywords"]
    ]
    sent = payload["sentiment"]
    sentiment = (
        SentimentRecord(
            label=sent["label"], score=float(sent["score"]), warning=bool(sent["warning"])
        )
        if sent is not None
        else None
    )
    return NodeAnnotations(keywords=keywords, sentiment=sentiment)


def deserialize(blob: bytes) -> BeamTree:
    """Parse a canonical tree file; scores are recomputed, not trusted."""
    try:
        payload = json.loads(blob.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedTreeError(f"tree file does not parse: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != TREE_FORMAT:
        raise MalformedTreeError("not a tree file")
    if payload.get("version") != TREE_VERSION:
        raise SchemaVersionError(
            f"unsupported tree version {payload.get('version')!r}"
        )
    try:
        nodes: dict[int, BeamNode] = {}
        for rec in payload["nodes"]:
            tokens = [
                Token(int(i), str(t))
                for i, t in zip(rec["token_ids"], rec["token_texts"], strict=True)
            ]
            n = BeamNode(
                node_id=int(rec["node_id"]),
                parent=rec["parent"],
                tokens=tokens,
                text=rec["text"],
                cond_prob=float(rec["cond_prob"]),
                children=[int(c) for c in rec["children"]],
                stale=bool(rec["stale"]),
                annotations=_parse_annotations(rec["annotations"]),
            )
            nodes[n.node_id] = n
        span = payload["replacement_span"]
        tree = BeamTree(
            tree_id=payload["tree_id"],
            prompt=payload["prompt"],
            nodes=nodes,
            root=int(payload["root"]),
            head=int(payload["head"]),
            start_override=payload["start_override"],
            end_override=payload["end_override"],
            params_used=payload["params_used"],
            backend_id=payload["backend_id"],
            loop_links=[(int(a), int(b)) for a, b in payload["loop_links"]],
            next_node_id=int(payload["next_node_id"]),
            replacement=payload["replacement"],
            replacement_span=(int(span[0]), int(span[1])) if span is not None else None,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedTreeError(f"tree file misses or mistypes fields: {exc}") from exc
    for n in tree.nodes.values():
        if n.parent is not None and n.cond_prob <= 0.0:
            raise MalformedTreeError(f"nonpositive cond_prob on node {n.node_id}")
    tree.recompute_scores()
    tree.validate()
    return tree

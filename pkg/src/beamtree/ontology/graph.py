"""Keyword-to-domain graphs over a semantic network.

Keyword instances disambiguate to synsets, climb hypernym chains until a
domain-carrying synset is reached, and attach to that domain through its
nearest subdomain.  The resulting graph is a forest whose leaves are the
keyword instances; `simplify` splices pass-through synsets and `layered`
flattens the forest into the four fixed layers used for display.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import NoSynsetFoundError, UnknownNodeError
from .network import SemanticNetwork, Synset

# node kinds, leaf to root
KIND_KEYWORD = "keyword"
KIND_SYNSET = "synset"
KIND_SUBDOMAIN = "subdomain"
KIND_DOMAIN = "domain"

LAYER_ORDER = (KIND_DOMAIN, KIND_SUBDOMAIN, KIND_SYNSET, KIND_KEYWORD)


@dataclass(frozen=True)
class KeywordInstance:
    """One occurrence of a keyword on one tree node."""

    tree_node_id: int
    surface: str
    embedding: tuple[float, ...] = ()


@dataclass(frozen=True)
class OntNode:
    node_id: str
    kind: str
    label: str
    # synset nodes: whether the synset carries a domain (kept by simplify)
    has_domain: bool = False
    # keyword nodes: the originating instance
    instance: KeywordInstance | None = None


@dataclass
class OntologyGraph:
    nodes: dict[str, OntNode] = field(default_factory=dict)
    parent: dict[str, str | None] = field(default_factory=dict)
    # instances that could not be attached, with a reason code
    unattached: list[tuple[KeywordInstance, str]] = field(default_factory=list)

    def children(self, node_id: str) -> list[str]:
        return sorted(c for c, p in self.parent.items() if p == node_id)

    def edges(self) -> list[tuple[str, str]]:
        """(child, parent) pairs, deterministically ordered."""
        return sorted((c, p) for c, p in self.parent.items() if p is not None)

    def leaves(self) -> list[str]:
        return sorted(
            n for n, node in self.nodes.items() if node.kind == KIND_KEYWORD
        )

    def domains(self) -> list[str]:
        return sorted(
            node.label for node in self.nodes.values() if node.kind == KIND_DOMAIN
        )

    def path_to_root(self, node_id: str) -> list[str]:
        if node_id not in self.nodes:
            raise UnknownNodeError(f"no graph node {node_id}")
        path = [node_id]
        while self.parent[path[-1]] is not None:
            path.append(self.parent[path[-1]])
        return path


def _cosine_distance(a, b) -> float:
    num = math.fsum(x * y for x, y in zip(a, b))
    na = math.sqrt(math.fsum(x * x for x in a))
    nb = math.sqrt(math.fsum(x * x for x in b))
    if na == 0.0 or nb == 0.0:
        return 2.0
    return 1.0 - num / (na * nb)


def _euclidean_sq(a, b) -> float:
    return math.fsum((x - y) ** 2 for x, y in zip(a, b))


def disambiguate(keyword: KeywordInstance, network: SemanticNetwork) -> str:
    """Pick the synset for a keyword instance.

    Candidates are synsets whose lemma set contains the surface
    (casefolded).  Among several, the one whose sense embedding is
    nearest the instance embedding wins (cosine distance, embedding-less
    synsets sort last); remaining ties break on synset_id.
    """
    candidates = network.synsets_for_lemma(keyword.surface)
    if not candidates:
        raise NoSynsetFoundError(
            f"no synset for {keyword.surface!r}", detail=keyword.surface
        )
    if len(candidates) == 1:
        return candidates[0]

    def sort_key(sid: str):
        emb = network.synsets[sid].sense_embedding
        if emb is None or not keyword.embedding or len(emb) != len(keyword.embedding):
            return (1, 0.0, sid)
        return (0, _cosine_distance(keyword.embedding, emb), sid)

    return min(candidates, key=sort_key)


def _placement_synset(syn: Synset, network: SemanticNetwork) -> Synset | None:
    """The synset a keyword hangs from: itself if a noun, else its first
    noun expansion."""
    if syn.pos == "n":
        return syn
    for sid in syn.noun_expansions:
        if network.synsets[sid].pos == "n":
            return network.synsets[sid]
    return None


def _nearest_subdomain(
    embedding: tuple[float, ...] | None,
    rows: list[tuple[str, str, tuple[float, ...]]],
) -> tuple[str, str]:
    """(domain, subdomain) whose embedding is nearest; ties and missing
    or mismatched embeddings resolve to the alphabetically first row."""
    if not rows:
        raise NoSynsetFoundError("network declares no subdomains")
    usable = (
        [r for r in rows if embedding is not None and len(r[2]) == len(embedding)]
        if embedding is not None
        else []
    )
    if not usable:
        return rows[0][0], rows[0][1]
    best = min(usable, key=lambda r: (_euclidean_sq(embedding, r[2]), r[0], r[1]))
    return best[0], best[1]


def _sub_id(domain: str, sub: str) -> str:
    return f"sub:{domain}/{sub}"


def build_graph(
    assignments: list[tuple[KeywordInstance, str]],
    network: SemanticNetwork,
) -> OntologyGraph:
    """Assemble the keyword/synset/subdomain/domain forest.

    `assignments` pairs each keyword instance with its disambiguated
    synset_id.  Hypernym chains follow the first-listed hypernym; a
    domain-carrying synset ends the climb and attaches to the nearest
    subdomain of its domain.  A chain that dead-ends without a domain
    attaches to the most similar subdomain overall.
    """
    graph = OntologyGraph()

    def ensure(node: OntNode) -> str:
        if node.node_id not in graph.nodes:
            graph.nodes[node.node_id] = node
            graph.parent[node.node_id] = None
        return node.node_id

    sub_rows = network.all_subdomains()

    for seq, (inst, synset_id) in enumerate(assignments):
        if synset_id not in network.synsets:
            graph.unattached.append((inst, "unknown-synset"))
            continue
        placement = _placement_synset(network.synsets[synset_id], network)
        if placement is None:
            graph.unattached.append((inst, "no-noun-placement"))
            continue

        # climb: placement, then first hypernyms, until a domain or a dead end
        chain = [placement]
        seen = {placement.synset_id}
        while chain[-1].domain is None and chain[-1].hypernyms:
            nxt = network.synsets[chain[-1].hypernyms[0]]
            if nxt.synset_id in seen:
                break
            seen.add(nxt.synset_id)
            chain.append(nxt)

        top = chain[-1]
        if top.domain is not None:
            dom_name = top.domain
            rows = [r for r in sub_rows if r[0] == dom_name]
            _, sub_name = _nearest_subdomain(top.sense_embedding, rows)
        else:
            dom_name, sub_name = _nearest_subdomain(top.sense_embedding, sub_rows)

        dom_id = ensure(OntNode(f"dom:{dom_name}", KIND_DOMAIN, dom_name))
        sub_id = ensure(
            OntNode(_sub_id(dom_name, sub_name), KIND_SUBDOMAIN, sub_name)
        )
        graph.parent[sub_id] = dom_id

        above = sub_id
        for syn in reversed(chain):
            sid = ensure(
                OntNode(
                    f"syn:{syn.synset_id}",
                    KIND_SYNSET,
                    syn.synset_id,
                    has_domain=syn.domain is not None,
                )
            )
            graph.parent[sid] = above
            above = sid

        kw_id = ensure(
            OntNode(
                f"kw:{seq}:{inst.tree_node_id}",
                KIND_KEYWORD,
                inst.surface,
                instance=inst,
            )
        )
        graph.parent[kw_id] = above

    return graph


def simplify(graph: OntologyGraph) -> OntologyGraph:
    """Splice out pass-through synsets.

    A synset node with exactly one child, one parent, no keyword child
    and no domain marker adds nothing to the hierarchy; its child is
    reconnected to its parent.  Runs to a fixpoint and is idempotent.
    Keyword leaves and their placement synsets are preserved.
    """
    nodes = dict(graph.nodes)
    parent = dict(graph.parent)

    def children_of(nid: str) -> list[str]:
        return [c for c, p in parent.items() if p == nid]

    changed = True
    while changed:
        changed = False
        for nid in sorted(nodes):
            node = nodes[nid]
            if node.kind != KIND_SYNSET or node.has_domain:
                continue
            kids = children_of(nid)
            if len(kids) != 1 or parent[nid] is None:
                continue
            if nodes[kids[0]].kind == KIND_KEYWORD:
                continue
            parent[kids[0]] = parent[nid]
            del nodes[nid]
            del parent[nid]
            changed = True
            break

    return OntologyGraph(
        nodes=nodes, parent=parent, unattached=list(graph.unattached)
    )


@dataclass(frozen=True)
class LayerCell:
    cell_id: str
    layer: str
    label: str
    parent_id: str | None
    weight: int


@dataclass
class LayeredHierarchy:
    domains: list[LayerCell] = field(default_factory=list)
    subdomains: list[LayerCell] = field(default_factory=list)
    synsets: list[LayerCell] = field(default_factory=list)
    keywords: list[LayerCell] = field(default_factory=list)

    def layer(self, kind: str) -> list[LayerCell]:
        return {
            KIND_DOMAIN: self.domains,
            KIND_SUBDOMAIN: self.subdomains,
            KIND_SYNSET: self.synsets,
            KIND_KEYWORD: self.keywords,
        }[kind]

    def total_weight(self, kind: str) -> int:
        return sum(c.weight for c in self.layer(kind))

    def to_payload(self) -> dict:
        return {
            kind: [
                {
                    "cell_id": c.cell_id,
                    "label": c.label,
                    "parent": c.parent_id,
                    "weight": c.weight,
                }
                for c in self.layer(kind)
            ]
            for kind in LAYER_ORDER
        }


def layered(graph: OntologyGraph) -> LayeredHierarchy:
    """Flatten a graph into the four display layers.

    Every keyword instance contributes weight 1 to its placement synset,
    that synset's subdomain, and the domain above; weights are conserved
    across layers.  Intermediate synsets without direct keyword children
    carry no cell of their own.
    """
    hierarchy = LayeredHierarchy()

    def up_to(nid: str, kind: str) -> str:
        cur = nid
        while graph.nodes[cur].kind != kind:
            nxt = graph.parent[cur]
            if nxt is None:
                raise UnknownNodeError(f"{nid} has no {kind} ancestor")
            cur = nxt
        return cur

    syn_weight: dict[str, int] = {}
    for kw_id in graph.leaves():
        placement = graph.parent[kw_id]
        if placement is None or graph.nodes[placement].kind != KIND_SYNSET:
            continue
        syn_weight[placement] = syn_weight.get(placement, 0) + 1
        hierarchy.keywords.append(
            LayerCell(
                cell_id=kw_id,
                layer=KIND_KEYWORD,
                label=graph.nodes[kw_id].label,
                parent_id=placement,
                weight=1,
            )
        )

    sub_weight: dict[str, int] = {}
    for sid in sorted(syn_weight):
        sub = up_to(sid, KIND_SUBDOMAIN)
        sub_weight[sub] = sub_weight.get(sub, 0) + syn_weight[sid]
        hierarchy.synsets.append(
            LayerCell(
                cell_id=sid,
                layer=KIND_SYNSET,
                label=graph.nodes[sid].label,
                parent_id=sub,
                weight=syn_weight[sid],
            )
        )

    dom_weight: dict[str, int] = {}
    for sub in sorted(sub_weight):
        dom = up_to(sub, KIND_DOMAIN)
        dom_weight[dom] = dom_weight.get(dom, 0) + sub_weight[sub]
        hierarchy.subdomains.append(
            LayerCell(
                cell_id=sub,
                layer=KIND_SUBDOMAIN,
                label=graph.nodes[sub].label,
                parent_id=dom,
                weight=sub_weight[sub],
            )
        )

    for dom in sorted(dom_weight):
        hierarchy.domains.append(
            LayerCell(
                cell_id=dom,
                layer=KIND_DOMAIN,
                label=graph.nodes[dom].label,
                parent_id=None,
                weight=dom_weight[dom],
            )
        )
    return hierarchy

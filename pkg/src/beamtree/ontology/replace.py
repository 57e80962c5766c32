"""Ontology-guided replacement suggestions for a keyword on a tree node.

The keyword is masked out of its sequence and the backend proposes
fill-ins; each candidate gets a contextual embedding (concatenated layer
range, zero-padded) and is matched against subdomain sense embeddings by
nearest-neighbor set overlap.  Matches are grouped per domain, covering
the domains already present in the tree's keyword graph plus any the
caller adds explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..backends.base import Backend, MaskedQueryConfig, Token
from ..errors import (
    CapabilityError,
    DimensionMismatchError,
    InvalidParameterError,
    KeywordNotFoundError,
    NoSynsetFoundError,
)
from ..semantics.annotate import locate_keyword_span
from ..tree import BeamTree
from .graph import KeywordInstance, OntologyGraph, build_graph, disambiguate, simplify
from .network import SemanticNetwork
from .nn import nn_index, nn_query


@dataclass
class ReplacementSuggestions:
    keyword: str
    node_id: int
    # domain name -> [(word, match_score)], best match first
    per_domain: dict[str, list[tuple[str, int]]] = field(default_factory=dict)

    def words(self) -> list[str]:
        out = []
        for entries in self.per_domain.values():
            out.extend(w for w, _ in entries)
        return out

    def to_payload(self) -> dict:
        return {
            "keyword": self.keyword,
            "node_id": self.node_id,
            "domains": {
                dom: [{"word": w, "match_score": s} for w, s in entries]
                for dom, entries in self.per_domain.items()
            },
        }


def keyword_instances_from_tree(tree: BeamTree) -> list[KeywordInstance]:
    """All annotated keyword occurrences, in (node id, rank) order."""
    out = []
    for nid in sorted(tree.nodes):
        ann = tree.nodes[nid].annotations
        if ann is None:
            continue
        for rec in ann.keywords:
            out.append(
                KeywordInstance(
                    tree_node_id=nid,
                    surface=rec.surface,
                    embedding=tuple(rec.embedding) if rec.embedding else (),
                )
            )
    return out


def graph_for_tree(tree: BeamTree, network: SemanticNetwork) -> OntologyGraph:
    """Disambiguate every annotated keyword and build the simplified
    graph; keywords without a synset are reported as unattached."""
    assignments = []
    missing: list[tuple[KeywordInstance, str]] = []
    for inst in keyword_instances_from_tree(tree):
        try:
            assignments.append((inst, disambiguate(inst, network)))
        except NoSynsetFoundError:
            missing.append((inst, "no-synset"))
    graph = simplify(build_graph(assignments, network))
    graph.unattached.extend(missing)
    return graph


def _pad(vec: list[float], length: int) -> list[float]:
    if len(vec) > length:
        raise DimensionMismatchError(
            f"embedding of length {len(vec)} exceeds embed_length {length}"
        )
    return list(vec) + [0.0] * (length - len(vec))


def _candidate_embedding(
    token: Token,
    prefix: list[Token],
    suffix: list[Token],
    backend: Backend,
    config: MaskedQueryConfig,
) -> list[float]:
    """Concatenated layer-range embedding of the candidate in context."""
    sequence = prefix + [token] + suffix
    position = len(prefix)
    lo, hi = config.layer_range
    parts: list[float] = []
    for layer in range(lo, hi + 1):
        parts.extend(backend.token_embeddings(sequence, layer)[position])
    return _pad(parts, config.embed_length)


def suggest_replacements(
    tree: BeamTree,
    node_id: int,
    extra_domains: list[str] | None = None,
    backend: Backend | None = None,
    network: SemanticNetwork | None = None,
    config: MaskedQueryConfig | None = None,
    surface: str | None = None,
) -> ReplacementSuggestions:
    """Domain-grouped replacement words for a keyword on the node.

    The node must carry keyword annotations; ``surface`` selects among
    them (default: the node's top keyword).  A candidate is suggested
    under a domain when its nearest-neighbor set (size overlap_m) shares
    members with some subdomain's; match_score is the overlap size.  The
    original keyword never suggests itself.
    """
    if backend is None or network is None:
        raise InvalidParameterError("backend and network are required")
    if config is None:
        config = MaskedQueryConfig()
    caps = backend.describe().capabilities
    if not (caps.masked and caps.embed):
        raise CapabilityError("backend lacks masked prediction or embeddings")

    node = tree.node(node_id)
    if node.annotations is None or not node.annotations.keywords:
        raise KeywordNotFoundError(f"node {node_id} has no keyword annotations")
    if surface is None:
        keyword = node.annotations.keywords[0]
    else:
        folded_want = surface.casefold()
        matches = [
            rec
            for rec in node.annotations.keywords
            if rec.surface.casefold() == folded_want
        ]
        if not matches:
            raise KeywordNotFoundError(
                f"node {node_id} has no keyword {surface!r}"
            )
        keyword = matches[0]

    context = tree.path_tokens(node_id)
    start, length = locate_keyword_span(keyword.surface, context, backend)
    prefix, suffix = context[:start], context[start + length :]

    # eligible domains: those present in the tree's graph plus explicit extras
    graph = graph_for_tree(tree, network)
    eligible = {d.casefold(): d for d in graph.domains()}
    for name in extra_domains or []:
        dom = network.domain_named(name)
        if dom is None:
            raise InvalidParameterError(f"unknown domain {name!r}")
        eligible[dom.name.casefold()] = dom.name
    sub_rows = [
        (dom, sub, emb)
        for dom, sub, emb in network.all_subdomains()
        if dom.casefold() in eligible
    ]
    result = ReplacementSuggestions(keyword=keyword.surface, node_id=node_id)
    if not sub_rows:
        return result

    masked = backend.masked_top_k(prefix, suffix, config)
    folded = keyword.surface.casefold()
    candidates = [tok for tok, _ in masked.entries if tok.text.casefold() != folded]
    if not candidates:
        return result

    vectors = [_pad(list(emb), config.embed_length) for _, _, emb in sub_rows]
    vectors.extend(
        _candidate_embedding(tok, prefix, suffix, backend, config)
        for tok in candidates
    )
    index = nn_index(vectors)
    m = min(config.overlap_m, index.size)
    neighbor_sets = [frozenset(nn_query(index, v, m)) for v in vectors]

    n_subs = len(sub_rows)
    scored: dict[str, dict[str, int]] = {}
    for ci, tok in enumerate(candidates):
        cand_set = neighbor_sets[n_subs + ci]
        for si, (dom, _sub, _emb) in enumerate(sub_rows):
            overlap = len(cand_set & neighbor_sets[si])
            if overlap > 0:
                by_word = scored.setdefault(dom, {})
                if overlap > by_word.get(tok.text, 0):
                    by_word[tok.text] = overlap

    for dom in sorted(scored):
        entries = sorted(
            scored[dom].items(), key=lambda e: (-e[1], e[0].casefold(), e[0])
        )
        result.per_domain[dom] = entries
    return result

"""Tree annotation pass: keywords with semantic placement, plus sentiment.

Only nodes without annotations are touched, so the pass is idempotent and
an edit (which clears annotations downstream) causes exactly the stale
subtree to be recomputed.  Per-node failures are collected as warnings,
never aborting the pass; a failed sentiment provider yields the neutral
label with the warning flag set.
"""

from __future__ import annotations

import re

from ..backends.base import Backend, Token
from ..errors import BeamTreeError, KeywordNotFoundError
from ..tree import BeamTree, KeywordRecord, NodeAnnotations, SentimentRecord
from .colormap import Colormap2D, sample_color
from .keywords import extract_keywords, load_default_stopwords
from .projection import ProjectionAnchors, project
from .sentiment import SentimentProvider

DEFAULT_EMBED_LAYER = 11

_WORD_RE = re.compile(r"[^\W_]+(?:'[^\W_]+)?", re.UNICODE)


def locate_keyword_span(
    surface: str, context_tokens: list[Token], backend: Backend
) -> tuple[int, int]:
    """(start, length) of the last occurrence of the keyword's token ids
    in the context; raises KeywordNotFoundError when absent."""
    try:
        needle = [t.id for t in backend.tokenize(surface)]
    except BeamTreeError as exc:
        raise KeywordNotFoundError(f"keyword {surface!r} not tokenizable") from exc
    ids = [t.id for t in context_tokens]
    if not needle or len(needle) > len(ids):
        raise KeywordNotFoundError(f"keyword {surface!r} not in context")
    for i in range(len(ids) - len(needle), -1, -1):
        if ids[i : i + len(needle)] == needle:
            return i, len(needle)
    raise KeywordNotFoundError(f"keyword {surface!r} not in context")


def embed_keyword(
    surface: str,
    context_tokens: list[Token],
    backend: Backend,
    layer: int = DEFAULT_EMBED_LAYER,
) -> list[float]:
    """Mean embedding of the keyword's tokens at their context position.

    Multi-token keywords average their token vectors; the last occurrence
    in the context (nearest the node being annotated) is used.
    """
    start, length = locate_keyword_span(surface, context_tokens, backend)
    vectors = backend.token_embeddings(context_tokens, layer)[start : start + length]
    dim = len(vectors[0])
    return [sum(v[c] for v in vectors) / len(vectors) for c in range(dim)]


def annotate_tree(
    tree: BeamTree,
    backend: Backend | None = None,
    anchors: ProjectionAnchors | None = None,
    colormap: Colormap2D | None = None,
    provider: SentimentProvider | None = None,
    layer: int = DEFAULT_EMBED_LAYER,
    stopwords: frozenset[str] | None = None,
) -> list[tuple[int, str]]:
    """Fill keyword and sentiment records on every unannotated node.

    Returns (node_id, error code) warnings for per-node failures.
    """
    if stopwords is None:
        stopwords = load_default_stopwords()
    can_embed = (
        backend is not None
        and backend.describe().capabilities.embed
        and anchors is not None
    )
    warnings: list[tuple[int, str]] = []
    for nid in sorted(tree.nodes):
        node = tree.nodes[nid]
        if node.annotations is not None:
            continue
        path = tree.path_to(nid)
        doc = "".join(n.text for n in path)
        own_words = {w.casefold() for w in _WORD_RE.findall(node.text)}
        records = []
        for surface, score in extract_keywords(doc, stopwords):
            if surface.casefold() not in own_words:
                continue
            record = KeywordRecord(surface=surface, score=score)
            if can_embed:
                try:
                    context = []
                    for n in path:
                        context.extend(n.tokens)
                    record.embedding = embed_keyword(surface, context, backend, layer)
                    record.coords = project(record.embedding, anchors)
                    if colormap is not None:
                        record.color = sample_color(record.coords, colormap)
                except BeamTreeError as exc:
                    warnings.append((nid, exc.code))
            records.append(record)
        if provider is not None:
            try:
                label = provider.classify(doc)
                sentiment = SentimentRecord(label=label.label, score=label.score)
            except Exception:
                sentiment = SentimentRecord(label="neutral", score=0.0, warning=True)
                warnings.append((nid, "sentiment-provider-failed"))
        else:
            sentiment = None
        node.annotations = NodeAnnotations(keywords=records, sentiment=sentiment)
    return warnings

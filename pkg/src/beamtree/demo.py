"""Bundled demo assets: corpus, backends, semantic network, projection.

Everything here is deterministic, so scripts and tests that build on the
demo backend produce identical bytes run-to-run.  Regenerate the
generated fixtures with scripts/make_fixtures.py.
"""

from __future__ import annotations

from importlib import resources

from .backends.base import MaskedQueryConfig
from .backends.ngram import NGramBackend, SoftmaxBigramBackend
from .ontology.network import SemanticNetwork, load_network
from .semantics.colormap import Colormap2D, load_colormap
from .semantics.projection import ProjectionAnchors, load_anchors

DEMO_BACKEND_ID = "demo-ngram"
DEMO_TRAINABLE_ID = "demo-softmax-bigram"
# the demo embeddings are 16-dim single-layer, so masked replacement runs
# with layer 11 only and no padding
DEMO_MASKED_CONFIG = MaskedQueryConfig(
    mask_k=200, embed_length=16, layer_range=(11, 11), overlap_m=10
)


def _data_text(name: str) -> str:
    return (resources.files("beamtree.data") / name).read_text(encoding="utf-8")


def demo_corpus_text() -> str:
    return _data_text("corpus_demo.txt")


def demo_backend(order: int = 2) -> NGramBackend:
    return NGramBackend.from_corpus(
        demo_corpus_text(), order=order, backend_id=DEMO_BACKEND_ID
    )


def demo_trainable_backend() -> SoftmaxBigramBackend:
    return SoftmaxBigramBackend.from_corpus(
        demo_corpus_text(), backend_id=DEMO_TRAINABLE_ID
    )


def demo_network() -> SemanticNetwork:
    return load_network(_data_text("semnet_demo.jsonl"))


def demo_anchors() -> ProjectionAnchors:
    return load_anchors(_data_text("anchors_demo.txt"))


def demo_colormap() -> Colormap2D:
    return load_colormap(_data_text("colormap_default.txt"))

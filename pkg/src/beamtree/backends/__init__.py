"""Model backends: built-in n-gram variants and the remote HTTP client."""

from __future__ import annotations

from ..errors import InvalidParameterError
from .base import (
    Backend,
    BackendCapabilities,
    BackendDescriptor,
    BackendLimits,
    FineTuneConfig,
    MaskedQueryConfig,
    ModelSnapshot,
    Token,
    TokenDistribution,
)
from .ngram import NGramBackend, SoftmaxBigramBackend


def build_backend(config: dict) -> Backend:
    """Construct a backend from a plain-dict config (workspace persistence).

    Recognized kinds: ``ngram``, ``softmax-bigram``, ``remote``.  Corpus
    backends accept either an inline ``corpus`` string or a vocabulary list.
    """
    kind = config.get("kind")
    backend_id = config.get("backend_id", kind or "backend")
    limits = BackendLimits(max_context=int(config.get("max_context", 1024)))
    seed = int(config.get("seed", 0))
    if kind == "ngram":
        order = int(config.get("order", 2))
        if "corpus" in config:
            return NGramBackend.from_corpus(
                config["corpus"], order=order, backend_id=backend_id,
                limits=limits, seed=seed,
            )
        if "vocabulary" in config:
            return NGramBackend.from_vocabulary(
                config["vocabulary"], order=order, backend_id=backend_id,
                limits=limits, seed=seed,
            )
        raise InvalidParameterError("ngram backend needs 'corpus' or 'vocabulary'")
    if kind == "softmax-bigram":
        if "corpus" not in config:
            raise InvalidParameterError("softmax-bigram backend needs 'corpus'")
        return SoftmaxBigramBackend.from_corpus(
            config["corpus"], backend_id=backend_id, limits=limits, seed=seed,
        )
    if kind == "remote":
        from .remote import RemoteBackend

        if "base_url" not in config:
            raise InvalidParameterError("remote backend needs 'base_url'")
        return RemoteBackend(config["base_url"], backend_id=backend_id)
    raise InvalidParameterError(f"unknown backend kind {kind!r}")


__all__ = [
    "Backend",
    "BackendCapabilities",
    "BackendDescriptor",
    "BackendLimits",
    "FineTuneConfig",
    "MaskedQueryConfig",
    "ModelSnapshot",
    "NGramBackend",
    "SoftmaxBigramBackend",
    "Token",
    "TokenDistribution",
    "build_backend",
]

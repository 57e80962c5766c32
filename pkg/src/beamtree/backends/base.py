"""Pluggable contract to a causal language model.

A backend advertises capabilities (generate / embed / masked / trainable)
and implements the operations it supports.  The engine never assumes more
than the flags promise, so deployments can wire different backends per
capability (e.g. a generator without masked prediction).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from ..errors import CapabilityError, InvalidParameterError, NotTrainableError

DEFAULT_MAX_CONTEXT = 1024  # matches common causal-LM context windows


@dataclass(frozen=True)
class Token:
    """One vocabulary entry: integer id plus surface form."""

    id: int
    text: str


@dataclass
class TokenDistribution:
    """Next-token probabilities, sorted descending, ties by ascending id.

    A full distribution sums to 1 (within 1e-9); a truncated one to <= 1.
    """

    entries: list[tuple[Token, float]]

    def __post_init__(self):
        self.entries = sorted(self.entries, key=lambda e: (-e[1], e[0].id))

    def top(self, k: int) -> "TokenDistribution":
        if k < 1:
            raise InvalidParameterError("k must be >= 1")
        return TokenDistribution(self.entries[:k])

    def probability_of(self, token_id: int) -> float:
        for token, p in self.entries:
            if token.id == token_id:
                return p
        return 0.0

    def rank_of(self, token_id: int) -> int:
        """1-based position of the token in the sorted distribution."""
        for i, (token, _) in enumerate(self.entries):
            if token.id == token_id:
                return i + 1
        raise InvalidParameterError(f"token id {token_id} not in distribution")

    def total_mass(self) -> float:
        return math.fsum(p for _, p in self.entries)


@dataclass(frozen=True)
class BackendLimits:
    """Context-length budget; longer inputs are truncated from the left."""

    max_context: int = DEFAULT_MAX_CONTEXT

    def __post_init__(self):
        if self.max_context < 1:
            raise InvalidParameterError("max_context must be >= 1")

    def truncate(self, tokens: Sequence[Token]) -> list[Token]:
        return list(tokens[-self.max_context:])


@dataclass(frozen=True)
class FineTuneConfig:
    learning_rate: float = 5e-5
    steps: int = 1

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise InvalidParameterError("learning_rate must be > 0")
        if self.steps < 1:
            raise InvalidParameterError("steps must be >= 1")


@dataclass(frozen=True)
class MaskedQueryConfig:
    """Parameters of the masked-replacement query.

    ``layer_range`` is inclusive; per-layer token embeddings are concatenated
    and zero-padded on the right to ``embed_length``.  ``overlap_m`` is the
    neighborhood size used when matching candidates against subdomains.
    """

    mask_k: int = 200
    embed_length: int = 2048
    layer_range: tuple[int, int] = (8, 11)
    overlap_m: int = 10

    def __post_init__(self):
        if self.mask_k < 1:
            raise InvalidParameterError("mask_k must be >= 1")
        if self.embed_length < 1:
            raise InvalidParameterError("embed_length must be >= 1")
        lo, hi = self.layer_range
        if lo > hi:
            raise InvalidParameterError("layer_range must be (low, high) with low <= high")
        if self.overlap_m < 1:
            raise InvalidParameterError("overlap_m must be >= 1")


@dataclass(frozen=True)
class ModelSnapshot:
    """Identity of a restorable model state; the blob itself stays opaque."""

    snapshot_id: str
    created_at: str
    parent_backend: str
    label: str = ""


@dataclass(frozen=True)
class BackendCapabilities:
    generate: bool = False
    embed: bool = False
    masked: bool = False
    trainable: bool = False


@dataclass(frozen=True)
class BackendDescriptor:
    backend_id: str
    kind: str
    capabilities: BackendCapabilities
    limits: BackendLimits
    embedding_dim: int = 0
    layer_range: tuple[int, int] = (0, 0)
    # True when token surface forms already carry their separators (BPE
    # style); False for word backends, where a continuation is " " + text.
    texts_include_separators: bool = False
    vocab_size: int = 0


class Backend:
    """Interface every backend implements; unsupported ops raise CapabilityError.

    Concurrency contract: any number of concurrent read queries (tokenize,
    distributions, embeddings), but fine_tune and restore require exclusive
    access.  Enforcement lives in the service layer.
    """

    def describe(self) -> BackendDescriptor:
        raise NotImplementedError

    # --- text <-> tokens ---

    def tokenize(self, text: str) -> list[Token]:
        raise NotImplementedError

    def detokenize(self, tokens: Sequence[Token]) -> str:
        raise NotImplementedError

    def continuation_text(self, token: Token) -> str:
        """Surface contribution of ``token`` when appended to a sequence."""
        if self.describe().texts_include_separators:
            return token.text
        return " " + token.text

    # --- queries ---

    def next_distribution(self, context: Sequence[Token]) -> TokenDistribution:
        raise CapabilityError("backend does not support generation")

    def token_embeddings(self, tokens: Sequence[Token], layer: int) -> list[list[float]]:
        raise CapabilityError("backend does not support embeddings")

    def masked_top_k(
        self,
        prefix: Sequence[Token],
        suffix: Sequence[Token],
        config: MaskedQueryConfig,
    ) -> TokenDistribution:
        raise CapabilityError("backend does not support masked prediction")

    # --- adaptation ---

    def fine_tune(self, sequence: Sequence[Token], config: FineTuneConfig) -> list[float]:
        raise NotTrainableError("backend is not trainable")

    def snapshot(self, label: str = "") -> ModelSnapshot:
        raise NotImplementedError

    def restore(self, snapshot_id: str) -> None:
        raise NotImplementedError

    def snapshot_bytes(self, snapshot_id: str) -> bytes:
        """Opaque state blob for persistence."""
        raise NotImplementedError

    def state_bytes(self) -> bytes:
        """Current state as an opaque blob (same format as snapshots)."""
        raise NotImplementedError

    def load_state_bytes(self, blob: bytes) -> None:
        raise NotImplementedError

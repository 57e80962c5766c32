"""Built-in word-level n-gram backends.

Two variants share one closed whitespace vocabulary:

* :class:`NGramBackend` — add-one-smoothed n-gram counts (order
  configurable, default 2).  Deterministic, not trainable.
* :class:`SoftmaxBigramBackend` — a bigram whose per-context logits are
  free parameters trained by gradient descent on the next-token
  cross-entropy.  Initialized from the same add-one counts, so an untrained
  instance reproduces the smoothed bigram distribution.

Both embed tokens as seeded pseudo-random vectors (dimension 16): stable
geometry for the projection and nearest-neighbor machinery downstream, no
semantics implied.  Masked prediction is defined as the n-gram continuation
of the prefix.
"""

from __future__ import annotations

import json
import math
from datetime import datetime, timezone
from typing import Sequence

import numpy as np

from ..errors import (
    ContextEmptyError,
    InvalidParameterError,
    LayerOutOfRangeError,
    TrainingDivergedError,
    UnknownSnapshotError,
    UnknownTokenError,
)
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

EMBEDDING_DIM = 16
LAYER_RANGE = (0, 11)

# Full-batch gradient descent on the mean next-token cross-entropy is
# monotone for learning rates below 2 / L with L <= 1/2 (softmax curvature
# bound per context row), i.e. any rate <= 4; we document 2.0 as the safe
# bound to keep a margin.
STABLE_LEARNING_RATE = 2.0


class _WordVocabulary:
    """Closed vocabulary of whitespace-separated words, ids by first appearance."""

    def __init__(self, words: Sequence[str]):
        self.id_of: dict[str, int] = {}
        self.words: list[str] = []
        for w in words:
            if w not in self.id_of:
                self.id_of[w] = len(self.words)
                self.words.append(w)
        if not self.words:
            raise InvalidParameterError("vocabulary must contain at least one word")

    def __len__(self) -> int:
        return len(self.words)

    def token(self, token_id: int) -> Token:
        return Token(token_id, self.words[token_id])

    def tokenize(self, text: str) -> list[Token]:
        tokens = []
        for w in text.split():
            if w not in self.id_of:
                raise UnknownTokenError(
                    f"word {w!r} is not in the backend vocabulary", detail=w
                )
            tokens.append(Token(self.id_of[w], w))
        return tokens


def _embedding(seed: int, layer: int, token_id: int) -> list[float]:
    rng = np.random.default_rng([seed, layer, token_id])
    return rng.uniform(-1.0, 1.0, EMBEDDING_DIM).tolist()


class _WordBackendBase(Backend):
    """Shared tokenizer, embeddings, masked query, and snapshot registry."""

    kind = "word"

    def __init__(self, vocab: _WordVocabulary, limits: BackendLimits, backend_id: str, seed: int):
        self._vocab = vocab
        self._limits = limits
        self._backend_id = backend_id
        self._seed = seed
        self._snapshots: dict[str, bytes] = {}
        self._snapshot_counter = 0

    # --- contract: text <-> tokens ---

    def tokenize(self, text: str) -> list[Token]:
        return self._vocab.tokenize(text)

    def detokenize(self, tokens: Sequence[Token]) -> str:
        return " ".join(t.text for t in tokens)

    # --- contract: queries ---

    def token_embeddings(self, tokens: Sequence[Token], layer: int) -> list[list[float]]:
        lo, hi = LAYER_RANGE
        if not lo <= layer <= hi:
            raise LayerOutOfRangeError(
                f"layer {layer} outside supported range {lo}..{hi}"
            )
        return [_embedding(self._seed, layer, t.id) for t in tokens]

    def masked_top_k(
        self,
        prefix: Sequence[Token],
        suffix: Sequence[Token],
        config: MaskedQueryConfig,
    ) -> TokenDistribution:
        del suffix  # the n-gram fill-in depends on the left context only
        return self.next_distribution(prefix).top(config.mask_k)

    # --- contract: snapshots ---

    def snapshot(self, label: str = "") -> ModelSnapshot:
        self._snapshot_counter += 1
        snapshot_id = f"s{self._snapshot_counter}"
        self._snapshots[snapshot_id] = self.state_bytes()
        return ModelSnapshot(
            snapshot_id=snapshot_id,
            created_at=datetime.now(timezone.utc).isoformat(),
            parent_backend=self._backend_id,
            label=label,
        )

    def restore(self, snapshot_id: str) -> None:
        if snapshot_id not in self._snapshots:
            raise UnknownSnapshotError(f"no snapshot {snapshot_id!r}")
        self.load_state_bytes(self._snapshots[snapshot_id])

    def snapshot_bytes(self, snapshot_id: str) -> bytes:
        if snapshot_id not in self._snapshots:
            raise UnknownSnapshotError(f"no snapshot {snapshot_id!r}")
        return self._snapshots[snapshot_id]

    def register_snapshot_bytes(self, snapshot_id: str, blob: bytes) -> None:
        """Re-attach a persisted snapshot blob (service restart path)."""
        self._snapshots[snapshot_id] = blob

    # --- helpers ---

    def _context_ids(self, context: Sequence[Token]) -> list[int]:
        truncated = self._limits.truncate(context)
        if not truncated:
            raise ContextEmptyError("context is empty after truncation")
        return [t.id for t in truncated]

    def _distribution_from_probs(self, probs: Sequence[float]) -> TokenDistribution:
        entries = [(self._vocab.token(i), float(p)) for i, p in enumerate(probs)]
        return TokenDistribution(entries)


class NGramBackend(_WordBackendBase):
    """Add-one-smoothed n-gram over a whitespace corpus.

    P(w | c) = (count(c, w) + 1) / (sum_w' count(c, w') + |V|), with the
    context c being the last (order - 1) token ids.  Unseen contexts fall
    back to the uniform distribution.  Denominators count continuations, so
    every distribution sums to exactly 1.
    """

    kind = "ngram"

    def __init__(
        self,
        vocab: _WordVocabulary,
        counts: dict[tuple[int, ...], dict[int, int]],
        order: int = 2,
        backend_id: str = "ngram",
        limits: BackendLimits = BackendLimits(),
        seed: int = 0,
    ):
        if order < 2:
            raise InvalidParameterError("order must be >= 2")
        super().__init__(vocab, limits, backend_id, seed)
        self._order = order
        self._counts = counts

    @classmethod
    def from_corpus(
        cls,
        corpus: str,
        order: int = 2,
        backend_id: str = "ngram",
        limits: BackendLimits = BackendLimits(),
        seed: int = 0,
    ) -> "NGramBackend":
        words = corpus.split()
        if not words:
            raise InvalidParameterError("corpus must contain at least one word")
        vocab = _WordVocabulary(words)
        ids = [vocab.id_of[w] for w in words]
        counts: dict[tuple[int, ...], dict[int, int]] = {}
        n = order - 1
        for i in range(len(ids) - n):
            ctx = tuple(ids[i : i + n])
            nxt = ids[i + n]
            bucket = counts.setdefault(ctx, {})
            bucket[nxt] = bucket.get(nxt, 0) + 1
        return cls(vocab, counts, order, backend_id, limits, seed)

    @classmethod
    def from_vocabulary(
        cls,
        words: Sequence[str],
        order: int = 2,
        backend_id: str = "ngram",
        limits: BackendLimits = BackendLimits(),
        seed: int = 0,
    ) -> "NGramBackend":
        """Count-free backend: every context yields the uniform distribution."""
        return cls(_WordVocabulary(words), {}, order, backend_id, limits, seed)

    def describe(self) -> BackendDescriptor:
        return BackendDescriptor(
            backend_id=self._backend_id,
            kind=self.kind,
            capabilities=BackendCapabilities(generate=True, embed=True, masked=True),
            limits=self._limits,
            embedding_dim=EMBEDDING_DIM,
            layer_range=LAYER_RANGE,
            texts_include_separators=False,
            vocab_size=len(self._vocab),
        )

    def next_distribution(self, context: Sequence[Token]) -> TokenDistribution:
        ids = self._context_ids(context)
        ctx = tuple(ids[-(self._order - 1):])
        bucket = self._counts.get(ctx, {})
        v = len(self._vocab)
        denom = sum(bucket.values()) + v
        probs = [(bucket.get(i, 0) + 1) / denom for i in range(v)]
        return self._distribution_from_probs(probs)

    def state_bytes(self) -> bytes:
        payload = {
            "format": "beamtree.ngram-state",
            "version": 1,
            "order": self._order,
            "vocab": self._vocab.words,
            "counts": [
                [list(ctx), sorted(bucket.items())]
                for ctx, bucket in sorted(self._counts.items())
            ],
        }
        return json.dumps(payload, separators=(",", ":"), ensure_ascii=False).encode()

    def load_state_bytes(self, blob: bytes) -> None:
        payload = json.loads(blob.decode())
        if payload.get("format") != "beamtree.ngram-state":
            raise InvalidParameterError("not an n-gram state blob")
        self._order = payload["order"]
        self._vocab = _WordVocabulary(payload["vocab"])
        self._counts = {
            tuple(ctx): {int(t): int(c) for t, c in bucket}
            for ctx, bucket in payload["counts"]
        }


class SoftmaxBigramBackend(_WordBackendBase):
    """Trainable bigram: one logit row per context token, softmax over rows.

    fine_tune runs full-batch gradient descent on the mean next-token
    cross-entropy of the given sequence.  The loss decreases monotonically
    for learning rates up to ``STABLE_LEARNING_RATE``.
    """

    kind = "softmax-bigram"

    def __init__(
        self,
        vocab: _WordVocabulary,
        weights: np.ndarray,
        backend_id: str = "softmax-bigram",
        limits: BackendLimits = BackendLimits(),
        seed: int = 0,
    ):
        super().__init__(vocab, limits, backend_id, seed)
        if weights.shape != (len(vocab), len(vocab)):
            raise InvalidParameterError("weights must be a square |V| x |V| matrix")
        self._weights = weights.astype(np.float64)

    @classmethod
    def from_corpus(
        cls,
        corpus: str,
        backend_id: str = "softmax-bigram",
        limits: BackendLimits = BackendLimits(),
        seed: int = 0,
    ) -> "SoftmaxBigramBackend":
        base = NGramBackend.from_corpus(corpus, order=2, limits=limits, seed=seed)
        vocab = base._vocab
        v = len(vocab)
        rows = []
        for ctx_id in range(v):
            dist = base.next_distribution([vocab.token(ctx_id)])
            probs = np.empty(v)
            for token, p in dist.entries:
                probs[token.id] = p
            rows.append(np.log(probs))
        return cls(vocab, np.vstack(rows), backend_id, limits, seed)

    def describe(self) -> BackendDescriptor:
        return BackendDescriptor(
            backend_id=self._backend_id,
            kind=self.kind,
            capabilities=BackendCapabilities(
                generate=True, embed=True, masked=True, trainable=True
            ),
            limits=self._limits,
            embedding_dim=EMBEDDING_DIM,
            layer_range=LAYER_RANGE,
            texts_include_separators=False,
            vocab_size=len(self._vocab),
        )

    def _row_probs(self, ctx_id: int) -> np.ndarray:
        row = self._weights[ctx_id]
        shifted = row - row.max()
        exp = np.exp(shifted)
        return exp / exp.sum()

    def next_distribution(self, context: Sequence[Token]) -> TokenDistribution:
        ids = self._context_ids(context)
        return self._distribution_from_probs(self._row_probs(ids[-1]))

    def fine_tune(self, sequence: Sequence[Token], config: FineTuneConfig) -> list[float]:
        ids = [t.id for t in self._limits.truncate(sequence)]
        if len(ids) < 2:
            raise InvalidParameterError("fine-tune sequence needs at least 2 tokens")
        contexts = np.array(ids[:-1])
        targets = np.array(ids[1:])
        n = len(targets)
        trace = []
        for _ in range(config.steps):
            probs = np.vstack([self._row_probs(c) for c in contexts])
            loss = float(-np.log(probs[np.arange(n), targets]).mean())
            if not math.isfinite(loss):
                raise TrainingDivergedError("non-finite training loss")
            trace.append(loss)
            grad = probs
            grad[np.arange(n), targets] -= 1.0
            for i, c in enumerate(contexts):
                self._weights[c] -= config.learning_rate / n * grad[i]
        return trace

    def state_bytes(self) -> bytes:
        payload = {
            "format": "beamtree.softmax-bigram-state",
            "version": 1,
            "vocab": self._vocab.words,
            "weights": [[float(x) for x in row] for row in self._weights],
        }
        return json.dumps(payload, separators=(",", ":"), ensure_ascii=False).encode()

    def load_state_bytes(self, blob: bytes) -> None:
        payload = json.loads(blob.decode())
        if payload.get("format") != "beamtree.softmax-bigram-state":
            raise InvalidParameterError("not a softmax-bigram state blob")
        self._vocab = _WordVocabulary(payload["vocab"])
        self._weights = np.array(payload["weights"], dtype=np.float64)

"""Decoding: beam search steps, sampling transforms, auto-prediction, and
comparative placeholder instantiation.

Beam semantics: each iteration expands the top_k best frontier sequences
(by cumulative log-probability) with candidate tokens, then keeps only the
top_k best extended sequences as the new frontier.  Losing branches stall:
their nodes stay in the tree as explorable leaves.  Stored probabilities
are always the raw model probabilities; temperature and nucleus mass shape
selection only.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
import random
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

from .backends.base import Backend, Token, TokenDistribution
from .errors import (
    CapabilityError,
    InvalidParameterError,
    PlaceholderError,
    ZeroProbabilityError,
)
from .tree import BeamTree, append_children, create_tree, select_head

PLACEHOLDER = "<PH>"
DEFAULT_TOP_P = 0.9


@dataclass(frozen=True)
class PredictionParams:
    """Knobs of one prediction run.

    temperature = 0 selects the top_k most probable candidates outright and
    makes decoding fully deterministic (seed-independent); temperature > 0
    draws without replacement from the nucleus of the temperature-scaled
    distribution.  no_repeat_ngram, when set, zeroes candidates that would
    complete an n-gram already present along the path.
    """

    top_k: int = 3
    next_n: int = 1
    temperature: float = 0.0
    top_p: float = DEFAULT_TOP_P
    no_repeat_ngram: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.top_k < 1:
            raise InvalidParameterError("top_k must be >= 1")
        if self.next_n < 1:
            raise InvalidParameterError("next_n must be >= 1")
        if self.temperature < 0:
            raise InvalidParameterError("temperature must be >= 0")
        if not 0 < self.top_p <= 1:
            raise InvalidParameterError("top_p must be in (0, 1]")
        if self.no_repeat_ngram is not None and self.no_repeat_ngram < 2:
            raise InvalidParameterError("no_repeat_ngram must be >= 2")

    def to_dict(self) -> dict:
        return {
            "top_k": self.top_k,
            "next_n": self.next_n,
            "temperature": self.temperature,
            "top_p": self.top_p,
            "no_repeat_ngram": self.no_repeat_ngram,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "PredictionParams":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(payload) - known
        if unknown:
            raise InvalidParameterError(f"unknown prediction parameters {sorted(unknown)}")
        return cls(**payload)


@dataclass(frozen=True)
class ComparativeSpec:
    """Template with exactly one placeholder, one tree per replacement.

    Sampling is disabled: temperature is forced to 0 so instances differ
    only through their substituted span.
    """

    template: str
    replacements: tuple[str, ...]
    params: PredictionParams = PredictionParams()

    def __post_init__(self):
        count = self.template.count(PLACEHOLDER)
        if count != 1:
            raise PlaceholderError(
                f"template must contain exactly one {PLACEHOLDER}, found {count}"
            )
        if not self.replacements:
            raise InvalidParameterError("replacements must be non-empty")
        if self.params.temperature != 0.0:
            object.__setattr__(
                self, "params", dataclasses.replace(self.params, temperature=0.0)
            )


def apply_temperature(dist: TokenDistribution, temperature: float) -> TokenDistribution:
    """p_i' = p_i^(1/T) / sum_j p_j^(1/T), computed in log space for stability."""
    if temperature <= 0:
        raise InvalidParameterError("temperature must be > 0 for scaling")
    logs = [
        (token, math.log(p) / temperature if p > 0 else -math.inf)
        for token, p in dist.entries
    ]
    peak = max(lp for _, lp in logs)
    raw = [(token, math.exp(lp - peak)) for token, lp in logs]
    total = math.fsum(w for _, w in raw)
    return TokenDistribution([(token, w / total) for token, w in raw])


def nucleus_filter(dist: TokenDistribution, top_p: float) -> TokenDistribution:
    """Smallest prefix of the sorted entries with mass >= top_p, renormalized."""
    if not 0 < top_p <= 1:
        raise InvalidParameterError("top_p must be in (0, 1]")
    kept = []
    running = 0.0
    for token, p in dist.entries:
        kept.append((token, p))
        running += p
        if running >= top_p - 1e-12:
            break
    mass = math.fsum(p for _, p in kept)
    return TokenDistribution([(token, p / mass) for token, p in kept])


def _sample_without_replacement(
    entries: list[tuple[Token, float]], k: int, rng: random.Random
) -> list[Token]:
    pool = list(entries)
    drawn = []
    while pool and len(drawn) < k:
        total = math.fsum(p for _, p in pool)
        r = rng.random() * total
        acc = 0.0
        pick = len(pool) - 1
        for i, (_, p) in enumerate(pool):
            acc += p
            if r < acc:
                pick = i
                break
        drawn.append(pool.pop(pick)[0])
    return drawn


def _completes_repeated_ngram(path_ids: list[int], candidate: int, n: int) -> bool:
    if len(path_ids) < n - 1:
        return False
    gram = tuple(path_ids[-(n - 1):]) + (candidate,)
    return any(
        tuple(path_ids[i : i + n]) == gram for i in range(len(path_ids) - n + 1)
    )


def _recompute_stale_path(tree: BeamTree, node_id: int, backend: Backend) -> None:
    """Refresh probabilities invalidated by edits along root -> node_id."""
    path = tree.path_to(node_id)
    root = path[0]
    if not root.tokens:
        root.tokens = backend.tokenize(root.text)
    root.stale = False
    context = list(root.tokens)
    for n in path[1:]:
        if n.stale:
            logp = 0.0
            local = list(context)
            for tok in n.tokens:
                p = backend.next_distribution(local).probability_of(tok.id)
                if p <= 0.0:
                    raise ZeroProbabilityError(
                        f"edited token {tok.text!r} has zero probability"
                    )
                logp += math.log(p)
                local.append(tok)
            n.cond_prob = math.exp(logp)
            n.stale = False
        context.extend(n.tokens)
    tree.recompute_scores()


def _candidate_tokens(
    dist: TokenDistribution,
    path_ids: list[int],
    params: PredictionParams,
    rng: random.Random,
) -> list[tuple[Token, float]]:
    """Per-frontier-node candidate selection; returns (token, raw model p)."""
    entries = dist.entries
    if params.no_repeat_ngram is not None:
        entries = [
            (t, p)
            for t, p in entries
            if not _completes_repeated_ngram(path_ids, t.id, params.no_repeat_ngram)
        ]
    entries = [(t, p) for t, p in entries if p > 0.0]
    if not entries:
        return []
    if params.temperature == 0.0:
        return entries[: params.top_k]
    scaled = apply_temperature(TokenDistribution(entries), params.temperature)
    nucleus = nucleus_filter(scaled, params.top_p)
    raw_p = {t.id: p for t, p in entries}
    picked = _sample_without_replacement(nucleus.entries, params.top_k, rng)
    return [(t, raw_p[t.id]) for t in picked]


def beam_step(
    tree: BeamTree, from_id: int, params: PredictionParams, backend: Backend
) -> list[int]:
    """Run params.next_n expansion iterations below ``from_id``.

    Returns the ids of all nodes created.  The tree is updated iteration by
    iteration, so a mid-run backend failure leaves completed iterations in
    place and the tree consistent.
    """
    descriptor = backend.describe()
    if not descriptor.capabilities.generate:
        raise CapabilityError("backend does not support generation")
    tree.node(from_id)
    _recompute_stale_path(tree, from_id, backend)

    created: list[int] = []
    frontier = [from_id]
    for _ in range(params.next_n):
        active = sorted(
            frontier, key=lambda nid: (-tree.nodes[nid].cum_logprob, nid)
        )[: params.top_k]
        pool: list[tuple[float, int, int, Token, float]] = []
        for nid in active:
            rng = random.Random(f"{params.seed}:{nid}")
            path_tokens = tree.path_tokens(nid)
            path_ids = [t.id for t in path_tokens]
            dist = backend.next_distribution(path_tokens)
            node_cum = tree.nodes[nid].cum_logprob
            for token, p in _candidate_tokens(dist, path_ids, params, rng):
                pool.append((node_cum + math.log(p), nid, token.id, token, p))
        if not pool:
            break
        pool.sort(key=lambda item: (-item[0], item[1], item[2]))
        survivors = pool[: params.top_k]
        frontier = []
        for nid in active:
            mine = [(tok, p) for _, parent, _, tok, p in survivors if parent == nid]
            if not mine:
                continue
            texts = [backend.continuation_text(tok) for tok, _ in mine]
            new_ids = append_children(tree, nid, mine, texts)
            frontier.extend(new_ids)
            created.extend(new_ids)
    select_head(tree)
    tree.params_used = params.to_dict()
    tree.backend_id = descriptor.backend_id
    return created


def auto_predict(
    tree: BeamTree,
    params: PredictionParams,
    backend: Backend,
    stop: Callable[[], bool] | None = None,
    max_steps: int | None = None,
) -> Iterator[int]:
    """Repeat beam_step at the current head, yielding after each step.

    The stream ends on the stop signal, after max_steps, or when a step
    creates no nodes (fully blocked by the repetition penalty).  Checking
    the signal only between steps keeps every completed step intact.
    """
    if stop is None and max_steps is None:
        raise InvalidParameterError("auto_predict needs a stop signal or max_steps")
    step = 0
    while max_steps is None or step < max_steps:
        if stop is not None and stop():
            return
        created = beam_step(tree, tree.head, params, backend)
        if not created:
            return
        step += 1
        yield step


def comparative_tree_id(template: str, replacement: str, params: PredictionParams) -> str:
    digest = hashlib.sha256(
        "\x1f".join([template, replacement, str(sorted(params.to_dict().items()))]).encode()
    ).hexdigest()
    return "cmp-" + digest[:12]


def instantiate_comparative(spec: ComparativeSpec, backend: Backend) -> list[BeamTree]:
    """One deterministically-decoded tree per replacement."""
    trees = []
    span_start = spec.template.index(PLACEHOLDER)
    for replacement in spec.replacements:
        prompt = spec.template.replace(PLACEHOLDER, replacement)
        tree = create_tree(
            prompt,
            backend,
            tree_id=comparative_tree_id(spec.template, replacement, spec.params),
        )
        tree.replacement = replacement
        tree.replacement_span = (span_start, span_start + len(replacement))
        beam_step(tree, tree.root, spec.params, backend)
        trees.append(tree)
    return trees

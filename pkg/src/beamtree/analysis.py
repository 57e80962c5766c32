"""Cross-tree analysis: word-list badges, UpSet columns, perplexity, and
the fine-tuning evaluation harness.

Word matching normalizes aggressively (strip surrounding punctuation,
casefold) because node texts carry separators.  UpSet groups trees by
exact (list, word) membership patterns; perplexity and the adaptation
reports share one token-level NLL definition so their numbers are
comparable.
"""

from __future__ import annotations

import csv
import io
import json
import math
import string
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

from .backends.base import Backend, FineTuneConfig, Token
from .errors import EmptyWordListError, InvalidParameterError, NotTrainableError
from .tree import BeamTree

REPORT_FORMAT = "beamtree.report"
REPORT_VERSION = 1

_STRIP_CHARS = string.punctuation + string.whitespace


@dataclass(frozen=True)
class WordList:
    name: str
    words: frozenset[str]

    def __post_init__(self):
        if not self.name:
            raise InvalidParameterError("wordlist name must be non-empty")
        if not self.words:
            raise EmptyWordListError(f"wordlist {self.name!r} has no words")


def parse_wordlist(name: str, text: str) -> WordList:
    """One word per line, `#` comments, case-folded, duplicates collapsed."""
    words = set()
    for line in text.splitlines():
        entry = line.split("#", 1)[0].strip()
        if entry:
            words.add(entry.casefold())
    return WordList(name=name, words=frozenset(words))


def load_wordlist(path: str | Path) -> WordList:
    p = Path(path)
    return parse_wordlist(p.stem, p.read_text(encoding="utf-8"))


def bundled_wordlist(name: str) -> WordList:
    text = (resources.files("beamtree.data.wordlists") / f"{name}.txt").read_text(
        encoding="utf-8"
    )
    return parse_wordlist(name, text)


def normalize_word(raw: str) -> str:
    return raw.strip(_STRIP_CHARS).casefold()


def normalized_words(text: str) -> list[str]:
    return [w for w in (normalize_word(t) for t in text.split()) if w]


def tree_words(tree: BeamTree) -> list[str]:
    """Normalized word sequence over every node of the tree, id order."""
    out: list[str] = []
    for nid in sorted(tree.nodes):
        out.extend(normalized_words(tree.nodes[nid].text))
    return out


# badges: {tree_id: {node_id: {list name: sorted matched words}}}
Badges = dict[str, dict[int, dict[str, list[str]]]]


def match_wordlists(trees: Sequence[BeamTree], lists: Sequence[WordList]) -> Badges:
    """Per-node badge assignment.

    A node matches list L when any normalized word of the node's own text
    is in L; nodes may carry several badges.  Nodes without matches are
    omitted.
    """
    badges: Badges = {}
    for tree in trees:
        per_node: dict[int, dict[str, list[str]]] = {}
        for nid in sorted(tree.nodes):
            words = set(normalized_words(tree.nodes[nid].text))
            if not words:
                continue
            hits = {}
            for wl in lists:
                matched = sorted(words & wl.words)
                if matched:
                    hits[wl.name] = matched
            if hits:
                per_node[nid] = hits
        badges[tree.tree_id] = per_node
    return badges


@dataclass(frozen=True)
class UpSetColumn:
    member_trees: tuple[str, ...]
    # list name -> [(word, total count across member trees)]
    per_list_words: dict[str, list[tuple[str, int]]]


@dataclass
class UpSetResult:
    columns: list[UpSetColumn] = field(default_factory=list)

    def to_payload(self) -> dict:
        return {
            "columns": [
                {
                    "member_trees": list(c.member_trees),
                    "lists": {
                        name: [{"word": w, "count": n} for w, n in entries]
                        for name, entries in c.per_list_words.items()
                    },
                }
                for c in self.columns
            ]
        }


def upset(
    trees: Sequence[BeamTree],
    lists: Sequence[WordList],
    badges: Badges | None = None,
) -> UpSetResult:
    """Group trees by identical (list, word) membership patterns.

    A (list, word) item belongs to the set of trees whose word sequence
    contains the word; one column is emitted per distinct non-empty tree
    set, counts summed over the member trees.  Columns are ordered by
    member-set size descending, then tree-id tuple ascending.
    """
    if badges is None:
        badges = match_wordlists(trees, lists)
    by_id = {t.tree_id: t for t in trees}
    counts = {tid: _word_counts(tree_words(t)) for tid, t in by_id.items()}

    # word-level membership, recovered from the badge structure
    items: dict[tuple[str, str], set[str]] = {}
    for tid, per_node in badges.items():
        if tid not in by_id:
            continue
        for hits in per_node.values():
            for list_name, words in hits.items():
                for w in words:
                    items.setdefault((list_name, w), set()).add(tid)

    grouped: dict[tuple[str, ...], dict[str, dict[str, int]]] = {}
    for (list_name, word), members in items.items():
        key = tuple(sorted(members))
        total = sum(counts[tid].get(word, 0) for tid in key)
        bucket = grouped.setdefault(key, {}).setdefault(list_name, {})
        bucket[word] = total

    ordered = sorted(grouped, key=lambda k: (-len(k), k))
    columns = [
        UpSetColumn(
            member_trees=key,
            per_list_words={
                name: sorted(words.items())
                for name, words in sorted(grouped[key].items())
            },
        )
        for key in ordered
    ]
    return UpSetResult(columns=columns)


def _word_counts(words: Sequence[str]) -> dict[str, int]:
    out: dict[str, int] = {}
    for w in words:
        out[w] = out.get(w, 0) + 1
    return out


# --- perplexity ---


@dataclass(frozen=True)
class PerplexityResult:
    value: float
    zero_probability: bool = False


def _nll_terms(backend: Backend, tokens: Sequence[Token]) -> tuple[list[float], bool]:
    terms = []
    hit_zero = False
    for t in range(1, len(tokens)):
        p = backend.next_distribution(tokens[:t]).probability_of(tokens[t].id)
        if p <= 0.0:
            hit_zero = True
            continue
        terms.append(-math.log(p))
    return terms, hit_zero


def perplexity(backend: Backend, tokens: Sequence[Token]) -> PerplexityResult:
    """exp of the mean next-token negative log likelihood.

    Predicts tokens 2..N each from its full preceding context; a
    zero-probability token makes the result +inf with the flag set.
    """
    if len(tokens) < 2:
        raise InvalidParameterError("perplexity needs at least 2 tokens")
    terms, hit_zero = _nll_terms(backend, tokens)
    if hit_zero:
        return PerplexityResult(value=math.inf, zero_probability=True)
    return PerplexityResult(value=math.exp(math.fsum(terms) / len(terms)))


def split_perplexity(backend: Backend, samples: Sequence[Sequence[Token]]) -> PerplexityResult:
    """Pooled perplexity over several token sequences (token-level mean)."""
    terms: list[float] = []
    hit_zero = False
    for tokens in samples:
        if len(tokens) < 2:
            continue
        t, z = _nll_terms(backend, tokens)
        terms.extend(t)
        hit_zero = hit_zero or z
    if hit_zero:
        return PerplexityResult(value=math.inf, zero_probability=True)
    if not terms:
        raise InvalidParameterError("no scoreable transitions in samples")
    return PerplexityResult(value=math.exp(math.fsum(terms) / len(terms)))


# --- adaptation reports ---


@dataclass(frozen=True)
class AdaptationRecord:
    step: int
    target_prob: float
    target_rank: int
    loss: float

    def __post_init__(self):
        if not 0.0 <= self.target_prob <= 1.0:
            raise InvalidParameterError("target_prob must be in [0, 1]")
        if self.target_rank < 1:
            raise InvalidParameterError("target_rank must be >= 1")


@dataclass
class AdaptationReport:
    target: str
    records: list[AdaptationRecord] = field(default_factory=list)

    def to_payload(self) -> dict:
        return {
            "target": self.target,
            "records": [
                {
                    "step": r.step,
                    "target_prob": r.target_prob,
                    "target_rank": r.target_rank,
                    "loss": r.loss,
                }
                for r in self.records
            ],
        }


def _require_trainable(backend: Backend) -> None:
    if not backend.describe().capabilities.trainable:
        raise NotTrainableError("backend is not trainable")


def local_adaptation_report(
    backend: Backend,
    sequence: Sequence[Token],
    target: Token,
    steps: int,
    config: FineTuneConfig | None = None,
    keep: bool = False,
) -> AdaptationReport:
    """Target probability / rank / loss after each fine-tune step.

    Record 0 is the untouched baseline; the backend is restored to it
    afterwards unless ``keep`` is set.  The loss column is the mean
    next-token NLL of the sequence under the model at that step, i.e. the
    quantity fine_tune descends.
    """
    _require_trainable(backend)
    if steps < 0:
        raise InvalidParameterError("steps must be >= 0")
    sequence = list(sequence)
    if len(sequence) < 2:
        raise InvalidParameterError("sequence must have at least 2 tokens")
    if sequence[-1].id != target.id:
        raise InvalidParameterError("target must be the final sequence token")
    if config is None:
        config = FineTuneConfig()

    context = sequence[:-1]
    baseline = backend.snapshot(label="local-adaptation-baseline")
    report = AdaptationReport(target=target.text)
    try:
        for step in range(steps + 1):
            if step > 0:
                backend.fine_tune(
                    sequence,
                    FineTuneConfig(learning_rate=config.learning_rate, steps=1),
                )
            dist = backend.next_distribution(context)
            terms, hit_zero = _nll_terms(backend, sequence)
            loss = math.inf if hit_zero else math.fsum(terms) / len(terms)
            report.records.append(
                AdaptationRecord(
                    step=step,
                    target_prob=dist.probability_of(target.id),
                    target_rank=dist.rank_of(target.id),
                    loss=loss,
                )
            )
    finally:
        if not keep:
            backend.restore(baseline.snapshot_id)
    return report


@dataclass(frozen=True)
class CurvePoint:
    train_samples: int
    train_ppl: float
    test_ppl: float


@dataclass
class PerplexityCurve:
    points: list[CurvePoint] = field(default_factory=list)

    def to_payload(self) -> dict:
        return {
            "points": [
                {
                    "train_samples": p.train_samples,
                    "train_ppl": p.train_ppl,
                    "test_ppl": p.test_ppl,
                }
                for p in self.points
            ]
        }


def global_adaptation_report(
    backend: Backend,
    samples: Sequence[str],
    split_ratio: float,
    step_schedule: Sequence[int],
    config: FineTuneConfig | None = None,
) -> PerplexityCurve:
    """Train/test perplexity after fine-tuning on growing train prefixes.

    The sample list is split in order (no shuffling, for determinism):
    the first ceil(ratio * len) samples train, the rest test.  Each
    schedule entry n fine-tunes a fresh baseline on the first n train
    samples, one fine_tune call per sample in order; n = 0 is the
    untouched baseline.  Perplexities are measured on the full train and
    test splits.  The backend is restored to its baseline afterwards.
    """
    _require_trainable(backend)
    if not 0.0 < split_ratio < 1.0:
        raise InvalidParameterError("split_ratio must be in (0, 1)")
    if len(samples) < 2:
        raise InvalidParameterError("need at least 2 samples")
    if config is None:
        config = FineTuneConfig()

    cut = max(1, math.ceil(split_ratio * len(samples)))
    cut = min(cut, len(samples) - 1)
    train, test = list(samples[:cut]), list(samples[cut:])
    train_tokens = [backend.tokenize(s) for s in train]
    test_tokens = [backend.tokenize(s) for s in test]

    state0 = backend.state_bytes()
    curve = PerplexityCurve()
    try:
        for n in step_schedule:
            if n < 0 or n > len(train):
                raise InvalidParameterError(
                    f"schedule entry {n} outside 0..{len(train)}"
                )
            backend.load_state_bytes(state0)
            for tokens in train_tokens[:n]:
                if len(tokens) >= 2:
                    backend.fine_tune(tokens, config)
            curve.points.append(
                CurvePoint(
                    train_samples=n,
                    train_ppl=split_perplexity(backend, train_tokens).value,
                    test_ppl=split_perplexity(backend, test_tokens).value,
                )
            )
    finally:
        backend.load_state_bytes(state0)
    return curve


# --- report export ---


def report_to_json(kind: str, payload: dict) -> str:
    doc = {"format": REPORT_FORMAT, "version": REPORT_VERSION, "kind": kind}
    doc.update(payload)
    return json.dumps(doc, ensure_ascii=False, separators=(",", ":")) + "\n"


def upset_to_csv(result: UpSetResult) -> str:
    """Columns: member_trees (|-joined), list, word, count."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["member_trees", "list", "word", "count"])
    for col in result.columns:
        members = "|".join(col.member_trees)
        for list_name, entries in col.per_list_words.items():
            for word, count in entries:
                writer.writerow([members, list_name, word, count])
    return buf.getvalue()


def adaptation_to_csv(report: AdaptationReport) -> str:
    """Columns: step, target_prob, target_rank, loss."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["step", "target_prob", "target_rank", "loss"])
    for r in report.records:
        writer.writerow([r.step, repr(r.target_prob), r.target_rank, repr(r.loss)])
    return buf.getvalue()


def curve_to_csv(curve: PerplexityCurve) -> str:
    """Columns: train_samples, train_ppl, test_ppl."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["train_samples", "train_ppl", "test_ppl"])
    for p in curve.points:
        writer.writerow([p.train_samples, repr(p.train_ppl), repr(p.test_ppl)])
    return buf.getvalue()

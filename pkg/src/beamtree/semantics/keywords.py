"""Unsupervised single-word keyword extraction.

Statistical scoring over five term features: casing, position, frequency
normalization, left/right co-occurrence dispersion, and sentence spread.
Lower score = more relevant.  No training, fully deterministic.
"""

from __future__ import annotations

import math
import re
import statistics
from importlib import resources

_WORD_RE = re.compile(r"[^\W_]+(?:'[^\W_]+)?", re.UNICODE)
_SENTENCE_RE = re.compile(r"[.!?\n]+")


def load_default_stopwords() -> frozenset[str]:
    text = (
        resources.files("beamtree.data.wordlists")
        .joinpath("stopwords_en.txt")
        .read_text("utf-8")
    )
    return frozenset(parse_wordfile(text))


def parse_wordfile(text: str) -> list[str]:
    """One entry per line, ``#`` comments, case-folded."""
    out = []
    for line in text.splitlines():
        entry = line.split("#", 1)[0].strip()
        if entry:
            out.append(entry.casefold())
    return out


def _sentences(text: str) -> list[list[str]]:
    return [
        _WORD_RE.findall(chunk)
        for chunk in _SENTENCE_RE.split(text)
        if _WORD_RE.findall(chunk)
    ]


def extract_keywords(
    text: str,
    stopwords: frozenset[str] | None = None,
    max_keywords: int | None = None,
    window: int = 2,
) -> list[tuple[str, float]]:
    """Ranked (surface, score) single-word candidates, best (lowest) first."""
    if stopwords is None:
        stopwords = load_default_stopwords()
    sentences = _sentences(text)
    if not sentences:
        return []

    stats: dict[str, dict] = {}
    flat: list[tuple[str, str, int]] = []  # (key, surface, sentence index)
    for s_idx, words in enumerate(sentences):
        for w_idx, w in enumerate(words):
            key = w.casefold()
            rec = stats.setdefault(
                key,
                {
                    "surface": w,
                    "tf": 0,
                    "upper": 0,
                    "acronym": 0,
                    "sent_positions": [],
                    "sentences": set(),
                    "left": [],
                    "right": [],
                },
            )
            rec["tf"] += 1
            if len(w) > 1 and w.isupper():
                rec["acronym"] += 1
            elif w[0].isupper() and w_idx > 0:
                rec["upper"] += 1
            rec["sent_positions"].append(s_idx)
            rec["sentences"].add(s_idx)
            for off in range(1, window + 1):
                if w_idx - off >= 0:
                    rec["left"].append(words[w_idx - off].casefold())
                if w_idx + off < len(words):
                    rec["right"].append(words[w_idx + off].casefold())
            flat.append((key, w, s_idx))

    tfs = [rec["tf"] for rec in stats.values()]
    mean_tf = statistics.fmean(tfs)
    std_tf = statistics.pstdev(tfs) if len(tfs) > 1 else 0.0
    max_tf = max(tfs)
    sentence_count = len(sentences)

    def dispersion(neighbors: list[str]) -> float:
        if not neighbors:
            return 0.0
        return len(set(neighbors)) / len(neighbors)

    scored = []
    for key, rec in stats.items():
        if key in stopwords or not any(c.isalpha() for c in key):
            continue
        tf = rec["tf"]
        casing = max(rec["upper"], rec["acronym"]) / (1.0 + math.log(tf))
        position = math.log(math.log(3.0 + statistics.median(rec["sent_positions"])))
        freq_norm = tf / (mean_tf + std_tf)
        relatedness = 1.0 + (dispersion(rec["left"]) + dispersion(rec["right"])) * (
            tf / max_tf
        )
        spread = len(rec["sentences"]) / sentence_count
        score = (relatedness * position) / (
            casing + freq_norm / relatedness + spread / relatedness
        )
        scored.append((rec["surface"], score))

    scored.sort(key=lambda item: (item[1], item[0].casefold()))
    return scored[:max_keywords] if max_keywords is not None else scored

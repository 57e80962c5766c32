"""Sequence sentiment, pluggable behind a tiny provider contract.

The default provider is a rule-based lexicon with a single-token negation
flip: desk-scale and deterministic, swappable for a neural classifier that
implements the same ``classify`` signature.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from typing import Protocol

from ..errors import InvalidParameterError
from .keywords import parse_wordfile

_TOKEN_RE = re.compile(r"[^\W_]+(?:'[^\W_]+)?", re.UNICODE)

# class thresholds on score: > +0.1 positive, < -0.1 negative, else neutral
DEFAULT_THRESHOLD = 0.1


@dataclass(frozen=True)
class SentimentLabel:
    label: str  # negative | neutral | positive
    score: float  # in [-1, 1]


class SentimentProvider(Protocol):
    def classify(self, text: str) -> SentimentLabel: ...


class LexiconSentimentProvider:
    """score = (positive hits - negative hits) / max(1, hits).

    A hit directly preceded by a negation token flips its polarity.
    """

    def __init__(
        self,
        positive: frozenset[str],
        negative: frozenset[str],
        negations: frozenset[str],
        threshold: float = DEFAULT_THRESHOLD,
    ):
        if not 0 < threshold < 1:
            raise InvalidParameterError("threshold must be in (0, 1)")
        self.positive = positive
        self.negative = negative
        self.negations = negations
        self.threshold = threshold

    @classmethod
    def bundled(cls, threshold: float = DEFAULT_THRESHOLD) -> "LexiconSentimentProvider":
        data = resources.files("beamtree.data.wordlists")
        read = lambda name: frozenset(
            parse_wordfile(data.joinpath(name).read_text("utf-8"))
        )
        return cls(
            positive=read("sentiment_positive.txt"),
            negative=read("sentiment_negative.txt"),
            negations=read("negations.txt"),
            threshold=threshold,
        )

    def classify(self, text: str) -> SentimentLabel:
        words = [w.casefold() for w in _TOKEN_RE.findall(text)]
        balance = 0
        hits = 0
        for i, w in enumerate(words):
            if w in self.positive:
                polarity = 1
            elif w in self.negative:
                polarity = -1
            else:
                continue
            if i > 0 and words[i - 1] in self.negations:
                polarity = -polarity
            balance += polarity
            hits += 1
        score = balance / max(1, hits)
        if score > self.threshold:
            label = "positive"
        elif score < -self.threshold:
            label = "negative"
        else:
            label = "neutral"
        return SentimentLabel(label=label, score=score)

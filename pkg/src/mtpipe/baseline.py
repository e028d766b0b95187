"""Lexical baseline metric: character n-gram F-score on the MQM scale.

Whitespace is removed before n-gram extraction. Orders with no n-grams
on either side contribute F = 0, so very short strings never reach a
perfect score.
"""

from __future__ import annotations

import collections
import dataclasses
from typing import Protocol, Sequence

from mtpipe.corpus import LanguagePair, Orientation, RatedSegment, ScoreEntry, ScoreSet
from mtpipe.errors import ValidationError


@dataclasses.dataclass(frozen=True)
class BaselineConfig:
    max_ngram: int = 6
    beta: float = 2.0

    def __post_init__(self):
        if self.max_ngram < 1:
            raise ValidationError("max_ngram must be >= 1")
        if not self.beta > 0:
            raise ValidationError("beta must be > 0")


def char_ngrams(text: str, n: int) -> collections.Counter:
    chars = "".join(text.split())
    return collections.Counter(chars[i : i + n] for i in range(len(chars) - n + 1))


def f_beta(hyp: collections.Counter, ref: collections.Counter, beta: float) -> float:
    matches = sum((hyp & ref).values())
    if not matches:
        return 0.0
    p = matches / sum(hyp.values())
    r = matches / sum(ref.values())
    b2 = beta * beta
    return (1 + b2) * p * r / (b2 * p + r)


def baseline_score(hypothesis: str, reference: str, config: BaselineConfig = BaselineConfig()) -> float:
    if not reference:
        raise ValidationError("baseline metric needs a non-empty reference")
    orders = range(1, config.max_ngram + 1)
    f = sum(f_beta(char_ngrams(hypothesis, n), char_ngrams(reference, n), config.beta) for n in orders)
    return min(25.0, max(0.0, 25.0 * (1.0 - f / config.max_ngram)))


class Scorer(Protocol):
    """Anything that scores one translation; neural metrics plug in here."""

    orientation: Orientation

    def __call__(self, source: str, hypothesis: str, reference: str | None) -> float: ...


class BaselineScorer:
    orientation = Orientation.LOWER_BETTER

    def __init__(self, config: BaselineConfig = BaselineConfig()):
        self.config = config

    def __call__(self, source: str, hypothesis: str, reference: str | None) -> float:
        if reference is None:
            raise ValidationError("the lexical baseline cannot score without a reference")
        return baseline_score(hypothesis, reference, self.config)


def score_records(
    records: Sequence[RatedSegment], config: BaselineConfig = BaselineConfig(), lp: LanguagePair | None = None
) -> ScoreSet:
    """Score every record of one language pair against its reference."""
    lps = {r.lp for r in records} if lp is None else {lp}
    if len(lps) != 1:
        raise ValidationError(f"score_records needs a single language pair, got {sorted(map(str, lps))}")
    (lp,) = lps
    entries = {}
    for r in records:
        if r.lp != lp:
            continue
        if not r.reference:
            raise ValidationError(f"segment {r.segment_id!r} ({r.system_id}) has no reference")
        entries[(r.segment_id, r.system_id)] = baseline_score(r.hypothesis, r.reference, config)
    return ScoreSet(
        lp, tuple(ScoreEntry(s, y, v) for (s, y), v in entries.items()), Orientation.LOWER_BETTER
    )

"""Paired synthetic test set: each synthetic translation is compared with
its original counterpart, and a metric is scored on how often it prefers
the better side."""

from __future__ import annotations

import dataclasses
import enum
import json
import math
import os
import warnings
from typing import Iterable, Sequence

from mtpipe.corpus import LanguagePair, Orientation, RatedSegment, ScoreEntry, ScoreSet
from mtpipe.errors import DataWarning, ValidationError
from mtpipe.synthgen import (
    CATEGORY_ORDER,
    PlanConfig,
    PlanLog,
    SyntheticCategory,
    sample_plan,
)


class GoodSide(str, enum.Enum):
    ORIGINAL = "ORIGINAL"
    SYNTHETIC = "SYNTHETIC"


SIDES = ("original", "synthetic")


@dataclasses.dataclass(frozen=True)
class Side:
    source: str
    hypothesis: str
    reference: str | None


@dataclasses.dataclass(frozen=True)
class ChallengePair:
    pair_id: str
    category: SyntheticCategory
    lp: LanguagePair
    good_side: GoodSide
    original: Side
    synthetic: Side
    origin_segment_id: str

    def side(self, name: str) -> Side:
        return self.original if name == "original" else self.synthetic

    def to_dict(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "category": self.category.value,
            "lp": str(self.lp),
            "good_side": self.good_side.value,
            "original": dataclasses.asdict(self.original),
            "synthetic": dataclasses.asdict(self.synthetic),
            "origin_segment_id": self.origin_segment_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> ChallengePair:
        return cls(
            pair_id=d["pair_id"],
            category=SyntheticCategory(d["category"]),
            lp=LanguagePair.parse(d["lp"]),
            good_side=GoodSide(d["good_side"]),
            original=Side(**d["original"]),
            synthetic=Side(**d["synthetic"]),
            origin_segment_id=d["origin_segment_id"],
        )


def build_challenge(
    records: Sequence[RatedSegment],
    seed: int,
    config: PlanConfig | None = None,
    log: PlanLog | None = None,
) -> list[ChallengePair]:
    """Generate synthetic examples with the training-data sampling plan and
    pair each with its origin.

    The original side is the origin hypothesis, except for MISSING_PUNCT
    where the reference itself plays the good translation. REF_MATCH pairs
    put the reference (synthetic side) against the origin hypothesis and are
    dropped when the two are identical.
    """
    if any(r.reference is None for r in records):
        raise ValidationError("challenge set construction needs references on every record")
    origin = {(r.lp, r.segment_id, r.system_id): r for r in records}
    pairs = []
    counters: dict[tuple, int] = {}
    for ex in sample_plan(records, seed, config, log):
        rec = origin[(ex.lp, ex.origin_segment_id, ex.origin_system_id)]
        if ex.category is SyntheticCategory.MISSING_PUNCT:
            original_hyp = rec.reference
        else:
            original_hyp = rec.hypothesis
        if ex.category is SyntheticCategory.REF_MATCH and original_hyp == ex.hypothesis:
            warnings.warn(
                f"ref_match/{ex.lp}: hypothesis already equals reference for segment "
                f"{ex.origin_segment_id!r}; pair skipped",
                DataWarning,
            )
            continue
        key = (ex.category, ex.lp)
        counters[key] = counters.get(key, 0) + 1
        good = GoodSide.SYNTHETIC if ex.category is SyntheticCategory.REF_MATCH else GoodSide.ORIGINAL
        pairs.append(
            ChallengePair(
                pair_id=f"{ex.category.value}:{ex.lp}:{counters[key]:05d}",
                category=ex.category,
                lp=ex.lp,
                good_side=good,
                original=Side(rec.source, original_hyp, rec.reference),
                synthetic=Side(ex.source, ex.hypothesis, ex.reference),
                origin_segment_id=ex.origin_segment_id,
            )
        )
    return pairs


@dataclasses.dataclass(frozen=True)
class CategoryResult:
    category: SyntheticCategory
    n: int
    accuracy: float | None  # None when no pairs were scored
    mean_diff: float | None  # good minus bad, higher-is-better axis
    advisory: bool = False


@dataclasses.dataclass(frozen=True)
class ChallengeReport:
    results: tuple[CategoryResult, ...]

    def __getitem__(self, category: SyntheticCategory) -> CategoryResult:
        for r in self.results:
            if r.category is category:
                return r
        raise KeyError(category)

    def to_dict(self) -> dict:
        return {
            r.category.value: {
                "n": r.n,
                "accuracy": r.accuracy,
                "mean_diff": r.mean_diff,
                "advisory": r.advisory,
                **({"note": "no pairs"} if r.n == 0 else {}),
            }
            for r in self.results
        }


def evaluate_challenge(
    pairs: Sequence[ChallengePair],
    scores: Sequence[tuple[float | None, float | None]],
    orientation: Orientation,
) -> ChallengeReport:
    """Per-category share of pairs where the good side scores strictly better.

    `scores[i]` is (original, synthetic) for `pairs[i]`. Pairs missing
    either score are skipped with a warning. REF_MATCH is reported as
    advisory: a candidate can legitimately beat its reference.
    """
    if len(scores) != len(pairs):
        raise ValidationError(f"{len(pairs)} pairs but {len(scores)} score tuples")
    correct: dict[SyntheticCategory, int] = {c: 0 for c in SyntheticCategory}
    diffs: dict[SyntheticCategory, list[float]] = {c: [] for c in SyntheticCategory}
    skipped = 0
    for pair, (orig, synth) in zip(pairs, scores):
        if orig is None or synth is None:
            skipped += 1
            continue
        a, b = orientation.align(orig), orientation.align(synth)
        good, bad = (a, b) if pair.good_side is GoodSide.ORIGINAL else (b, a)
        correct[pair.category] += good > bad
        diffs[pair.category].append(good - bad)
    if skipped:
        warnings.warn(f"{skipped} challenge pairs lack a score for one side; excluded", DataWarning)
    results = []
    for c in sorted(SyntheticCategory, key=CATEGORY_ORDER.get):
        n = len(diffs[c])
        results.append(
            CategoryResult(
                category=c,
                n=n,
                accuracy=correct[c] / n if n else None,
                mean_diff=math.fsum(diffs[c]) / n if n else None,
                advisory=c is SyntheticCategory.REF_MATCH,
            )
        )
    return ChallengeReport(tuple(results))


def score_pairs(pairs: Sequence[ChallengePair], scorer) -> list[tuple[float, float]]:
    """Score both sides of every pair with the same scorer and input mode."""
    return [
        tuple(scorer(s.source, s.hypothesis, s.reference) for s in (p.original, p.synthetic))
        for p in pairs
    ]


def scores_from_scoreset(pairs: Sequence[ChallengePair], scores: ScoreSet) -> list[tuple[float | None, float | None]]:
    """Look up side scores keyed (segment_id=pair_id, system_id=side name)."""
    table = scores.as_dict()
    return [(table.get((p.pair_id, "original")), table.get((p.pair_id, "synthetic"))) for p in pairs]


def to_scoreset(pairs: Sequence[ChallengePair], side_scores, orientation: Orientation, lp: LanguagePair) -> ScoreSet:
    entries = []
    for p, (orig, synth) in zip(pairs, side_scores):
        entries.append(ScoreEntry(p.pair_id, "original", orig))
        entries.append(ScoreEntry(p.pair_id, "synthetic", synth))
    return ScoreSet(lp, tuple(entries), orientation)


CATEGORY_HEADERS = {
    SyntheticCategory.EMPTY: "Empty",
    SyntheticCategory.GIBBERISH: "Gibberish",
    SyntheticCategory.UNRELATED: "Unrelated",
    SyntheticCategory.UNDERTRANSLATION: "Undertr.",
    SyntheticCategory.DUPLICATION: "Duplic.",
    SyntheticCategory.MISSING_PUNCT: "MissPunct",
    SyntheticCategory.REF_MATCH: "RefMatch*",
}


def format_challenge_table(rows: Sequence[tuple[str, ChallengeReport]]) -> str:
    """Seven accuracy columns (in %), one row per variant. '*' marks advisory."""
    name_w = max([len("variant")] + [len(n) for n, _ in rows])
    cats = sorted(SyntheticCategory, key=CATEGORY_ORDER.get)
    col_w = max(len(h) for h in CATEGORY_HEADERS.values())
    header = f"{'variant':<{name_w}} | " + " ".join(f"{CATEGORY_HEADERS[c]:>{col_w}}" for c in cats)
    lines = [header, "-" * len(header)]
    for name, report in rows:
        cells = []
        for c in cats:
            acc = report[c].accuracy
            cells.append(f"{'--':>{col_w}}" if acc is None else f"{100 * acc:>{col_w}.2f}")
        lines.append(f"{name:<{name_w}} | " + " ".join(cells))
    return "\n".join(lines) + "\n"


def save_challenge(pairs: Iterable[ChallengePair], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        for p in pairs:
            f.write(json.dumps(p.to_dict(), ensure_ascii=False) + "\n")


def load_challenge(path: str | os.PathLike) -> list[ChallengePair]:
    with open(path, encoding="utf-8") as f:
        return [ChallengePair.from_dict(json.loads(line)) for line in f if line.strip()]

"""Meta-evaluation statistics: system-level pairwise accuracy and Pearson,
segment-level group-by-item pairwise accuracy with tie calibration, and
no-grouping segment-level Pearson.

Accuracies are computed as exact rationals and rounded once to float, so
two correct implementations agree bit-for-bit.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from fractions import Fraction
from typing import Sequence

from mtpipe.corpus import LanguagePair, Orientation, RatedSegment, ScoreSet, orientation_of
from mtpipe.errors import DataWarning, ValidationError

HIGHER = Orientation.HIGHER_BETTER

Group = Sequence[tuple[float, float]]  # (human, metric) for translations of one source segment


@dataclasses.dataclass(frozen=True)
class SystemScore:
    system_id: str
    human: float
    metric: float

    def __post_init__(self):
        if not (math.isfinite(self.human) and math.isfinite(self.metric)):
            raise ValidationError(f"system {self.system_id!r} has a non-finite score")


@dataclasses.dataclass(frozen=True)
class TieThreshold:
    epsilon: float
    achieved_accuracy: float


@dataclasses.dataclass(frozen=True)
class EvalReport:
    lp: LanguagePair
    seg_acc: float
    seg_pearson: float
    sys_acc: float
    sys_pearson: float
    tie: TieThreshold
    n_segments: int
    n_systems: int

    def to_dict(self) -> dict:
        return {
            "lp": str(self.lp),
            "seg_acc": self.seg_acc,
            "seg_pearson": self.seg_pearson,
            "sys_acc": self.sys_acc,
            "sys_pearson": self.sys_pearson,
            "tie_epsilon": self.tie.epsilon,
            "tie_accuracy": self.tie.achieved_accuracy,
            "n_segments": self.n_segments,
            "n_systems": self.n_systems,
        }

    @classmethod
    def from_dict(cls, d: dict) -> EvalReport:
        return cls(
            lp=LanguagePair.parse(d["lp"]),
            seg_acc=float(d["seg_acc"]),
            seg_pearson=float(d["seg_pearson"]),
            sys_acc=float(d["sys_acc"]),
            sys_pearson=float(d["sys_pearson"]),
            tie=TieThreshold(float(d["tie_epsilon"]), float(d["tie_accuracy"])),
            n_segments=int(d["n_segments"]),
            n_systems=int(d["n_systems"]),
        )


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    if len(xs) != len(ys):
        raise ValidationError(f"length mismatch: {len(xs)} vs {len(ys)}")
    n = len(xs)
    if n < 2:
        raise ValidationError("pearson needs at least 2 points")
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    dx = [x - mx for x in xs]
    dy = [y - my for y in ys]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0.0:
        raise ValidationError("pearson undefined: first variable (xs) has zero variance")
    if syy == 0.0:
        raise ValidationError("pearson undefined: second variable (ys) has zero variance")
    r = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def sys_pairwise_accuracy(
    systems: Sequence[SystemScore],
    human_orientation: Orientation = HIGHER,
    metric_orientation: Orientation = HIGHER,
) -> float:
    """Share of system pairs the metric orders like the humans.

    Pairs with equal human scores are left out; metric ties count as wrong.
    """
    if len(systems) < 2:
        raise ValidationError("system-level accuracy needs at least 2 systems")
    correct = total = 0
    for i in range(len(systems)):
        for j in range(i + 1, len(systems)):
            a, b = systems[i], systems[j]
            h = _sign(human_orientation.align(a.human) - human_orientation.align(b.human))
            if h == 0:
                continue
            m = _sign(metric_orientation.align(a.metric) - metric_orientation.align(b.metric))
            total += 1
            correct += m == h
    if total == 0:
        raise ValidationError("all system pairs are tied in human scores")
    return float(Fraction(correct, total))


@dataclasses.dataclass(frozen=True)
class _Pair:
    group: int
    diff: float  # |metric difference|
    human_tie: bool
    agree: bool  # metric order matches human order (False on any tie)


def _pairs(groups: Sequence[Group], ho: Orientation, mo: Orientation) -> tuple[list[_Pair], list[int]]:
    pairs, totals = [], []
    for g in groups:
        if len(g) < 2:
            continue
        gi = len(totals)
        n = 0
        for i in range(len(g)):
            for j in range(i + 1, len(g)):
                (hi, mi), (hj, mj) = g[i], g[j]
                h = _sign(ho.align(hi) - ho.align(hj))
                m = _sign(mo.align(mi) - mo.align(mj))
                pairs.append(_Pair(gi, abs(mi - mj), h == 0, h != 0 and h == m))
                n += 1
        totals.append(n)
    return pairs, totals


def _seg_fraction(pairs: list[_Pair], totals: list[int], epsilon: float) -> Fraction:
    correct = [0] * len(totals)
    for p in pairs:
        if p.diff <= epsilon:
            correct[p.group] += p.human_tie
        else:
            correct[p.group] += p.agree
    return sum((Fraction(c, t) for c, t in zip(correct, totals)), Fraction(0)) / len(totals)


def seg_pairwise_accuracy(
    groups: Sequence[Group],
    epsilon: float = 0.0,
    human_orientation: Orientation = HIGHER,
    metric_orientation: Orientation = HIGHER,
) -> float:
    """Group-by-item pairwise accuracy with tie threshold `epsilon`.

    A pair counts as a predicted tie when its metric scores differ by at
    most epsilon. Per-group accuracies are averaged without weighting.
    """
    if epsilon < 0 or not math.isfinite(epsilon):
        raise ValidationError(f"epsilon must be finite and >= 0, got {epsilon}")
    pairs, totals = _pairs(groups, human_orientation, metric_orientation)
    if not totals:
        raise ValidationError("no segment group has two or more translations")
    return float(_seg_fraction(pairs, totals, epsilon))


def tie_candidates(diffs: Sequence[float]) -> list[float]:
    """0, every distinct |metric diff|, and midpoints between consecutive ones."""
    distinct = sorted(set(diffs))
    cands = {0.0, *distinct}
    cands.update((a + b) / 2 for a, b in zip(distinct, distinct[1:]))
    return sorted(cands)


def calibrate_ties(
    groups: Sequence[Group],
    human_orientation: Orientation = HIGHER,
    metric_orientation: Orientation = HIGHER,
) -> TieThreshold:
    """Pick the tie threshold maximizing segment accuracy on `groups`.

    Sweeps the candidates in increasing order, flipping each pair's
    contribution once epsilon reaches its metric difference. Bookkeeping is
    in integers over a common denominator; ties go to the smaller epsilon.
    """
    pairs, totals = _pairs(groups, human_orientation, metric_orientation)
    if not totals:
        raise ValidationError("no segment group has two or more translations")
    denom = math.lcm(*totals)
    weight = [denom // t for t in totals]

    # Numerator when no pair is predicted tied, then per-pair change once it is.
    numer = sum(weight[p.group] for p in pairs if p.agree)
    changes = sorted(
        (p.diff, weight[p.group] * (int(p.human_tie) - int(p.agree))) for p in pairs
    )
    best_numer, best_eps = None, 0.0
    k = 0
    for eps in tie_candidates([p.diff for p in pairs]):
        while k < len(changes) and changes[k][0] <= eps:
            numer += changes[k][1]
            k += 1
        if best_numer is None or numer > best_numer:
            best_numer, best_eps = numer, eps
    accuracy = float(Fraction(best_numer, denom * len(totals)))
    return TieThreshold(best_eps, accuracy)


@dataclasses.dataclass(frozen=True)
class JoinedRow:
    segment_id: str
    system_id: str
    human: float
    metric: float


def join(ratings: Sequence[RatedSegment], scores: ScoreSet) -> list[JoinedRow]:
    """Pair human and metric scores on (segment_id, system_id) for scores.lp.

    Human scores from several raters are averaged first. Rated segments
    with no metric score are dropped with a warning.
    """
    human: dict[tuple[str, str], list[float]] = {}
    for r in ratings:
        if r.lp == scores.lp:
            human.setdefault((r.segment_id, r.system_id), []).append(r.score)
    metric = scores.as_dict()
    rows = []
    missing = 0
    for key, values in human.items():
        if key not in metric:
            missing += 1
            continue
        rows.append(JoinedRow(key[0], key[1], math.fsum(values) / len(values), metric[key]))
    if missing:
        warnings.warn(f"{scores.lp}: {missing} rated segments have no metric score", DataWarning)
    if not rows:
        raise ValidationError(f"{scores.lp}: ratings and scores do not join on any (segment_id, system_id)")
    return rows


def human_orientation(ratings: Sequence[RatedSegment], lp: LanguagePair | None = None) -> Orientation:
    kinds = {r.rating_kind for r in ratings if lp is None or r.lp == lp}
    if len(kinds) != 1:
        raise ValidationError(f"expected one rating kind, found {sorted(k.value for k in kinds)}")
    return orientation_of(kinds.pop())


def system_scores(ratings: Sequence[RatedSegment], scores: ScoreSet) -> list[SystemScore]:
    """Mean human and metric score per system over its joined segments."""
    rows = join(ratings, scores)
    by_system: dict[str, list[JoinedRow]] = {}
    for row in rows:
        by_system.setdefault(row.system_id, []).append(row)
    rated_systems = {r.system_id for r in ratings if r.lp == scores.lp}
    for system in sorted(rated_systems - by_system.keys()):
        warnings.warn(f"{scores.lp}: system {system!r} has no joined segments; excluded", DataWarning)
    segment_sets = {frozenset(r.segment_id for r in rs) for rs in by_system.values()}
    if len(segment_sets) > 1:
        warnings.warn(
            f"{scores.lp}: systems are scored on different segment sets (unbalanced join)", DataWarning
        )
    return [
        SystemScore(
            system,
            math.fsum(r.human for r in rs) / len(rs),
            math.fsum(r.metric for r in rs) / len(rs),
        )
        for system, rs in sorted(by_system.items())
    ]


def segment_groups(rows: Sequence[JoinedRow]) -> list[list[tuple[float, float]]]:
    groups: dict[str, list[tuple[float, float]]] = {}
    for row in rows:
        groups.setdefault(row.segment_id, []).append((row.human, row.metric))
    return list(groups.values())


def no_grouping_pearson(ratings: Sequence[RatedSegment], scores: ScoreSet) -> float:
    """Pearson over all joined translations, both sides oriented higher-is-better."""
    rows = join(ratings, scores)
    ho = human_orientation(ratings, scores.lp)
    return pearson(
        [ho.align(r.human) for r in rows],
        [scores.orientation.align(r.metric) for r in rows],
    )


def evaluate(ratings: Sequence[RatedSegment], scores: ScoreSet) -> EvalReport:
    """All four statistics for one language pair."""
    ho = human_orientation(ratings, scores.lp)
    mo = scores.orientation
    rows = join(ratings, scores)
    groups = segment_groups(rows)
    tie = calibrate_ties(groups, ho, mo)
    systems = system_scores(ratings, scores)
    return EvalReport(
        lp=scores.lp,
        seg_acc=tie.achieved_accuracy,
        seg_pearson=pearson([ho.align(r.human) for r in rows], [mo.align(r.metric) for r in rows]),
        sys_acc=sys_pairwise_accuracy(systems, ho, mo),
        sys_pearson=pearson([ho.align(s.human) for s in systems], [mo.align(s.metric) for s in systems]),
        tie=tie,
        n_segments=len(groups),
        n_systems=len(systems),
    )


def format_table(rows: Sequence[tuple[str, Sequence[EvalReport]]], statistic: str = "accuracy") -> str:
    """Plain-text table: one row per variant, segment-level columns then
    system-level columns, one column per language pair (values in %)."""
    if statistic not in ("accuracy", "pearson"):
        raise ValueError(f"statistic must be 'accuracy' or 'pearson', got {statistic!r}")
    lps: list[str] = []
    for _, reports in rows:
        for rep in reports:
            if str(rep.lp) not in lps:
                lps.append(str(rep.lp))
    if statistic == "accuracy":
        keys, label = ("seg_acc", "sys_acc"), "pairwise accuracy"
    else:
        keys, label = ("seg_pearson", "sys_pearson"), "Pearson's r"
    titles = (f"Segment-level {label}", f"System-level {label}")
    col_w = max([8] + [len(lp) for lp in lps])
    block_w = max(len(lps) * (col_w + 1) - 1, *(len(t) for t in titles))
    name_w = max([len("variant")] + [len(name) for name, _ in rows])

    def line(name: str, blocks: Sequence[str]) -> str:
        return f"{name:<{name_w}} | " + " | ".join(f"{b:>{block_w}}" for b in blocks)

    header = line("variant", [" ".join(f"{lp:>{col_w}}" for lp in lps)] * 2)
    out = [line("", [f"{t:^{block_w}}" for t in titles]), header, "-" * len(header)]
    for name, reports in rows:
        by_lp = {str(r.lp): r for r in reports}
        blocks = []
        for key in keys:
            cells = [
                f"{100 * getattr(by_lp[lp], key):>{col_w}.2f}" if lp in by_lp else f"{'--':>{col_w}}"
                for lp in lps
            ]
            blocks.append(" ".join(cells))
        out.append(line(name, blocks))
    return "\n".join(out) + "\n"

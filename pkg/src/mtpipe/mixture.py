"""Hybrid input serialization and stage-1/stage-2 training mixtures."""

from __future__ import annotations

import dataclasses
import enum
import json
import os
import random
import warnings
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from mtpipe.corpus import RatedSegment, RatingKind
from mtpipe.errors import DataWarning, ValidationError
from mtpipe.ratings import (
    TargetScale,
    TargetScore,
    da_to_mqm,
    mqm_label_to_stage1,
    to_stage1_target,
)
from mtpipe.synthgen import CATEGORY_ORDER, SyntheticCategory, SyntheticExample

MIXTURE_FORMAT_VERSION = 1
INPUT_FORMAT = {
    "QE": "source: {source} candidate: {hypothesis}",
    "REF": "candidate: {hypothesis} reference: {reference}",
    "SRC_REF": "source: {source} candidate: {hypothesis} reference: {reference}",
    "empty_section": "prefix only, e.g. 'candidate:'",
}


class InputMode(str, enum.Enum):
    QE = "QE"
    REF = "REF"
    SRC_REF = "SRC_REF"


_SECTIONS = {
    InputMode.QE: ("source", "hypothesis"),
    InputMode.REF: ("hypothesis", "reference"),
    InputMode.SRC_REF: ("source", "hypothesis", "reference"),
}
_PREFIX = {"source": "source:", "hypothesis": "candidate:", "reference": "reference:"}


def serialize_input(
    source: str | None, hypothesis: str | None, reference: str | None, mode: InputMode
) -> str:
    """Render one model input, e.g. "source: s candidate: h reference: r".

    Sections are joined by one space. An empty field renders as its bare
    prefix so the string never ends in whitespace we added.
    """
    mode = InputMode(mode)
    fields = {"source": source, "hypothesis": hypothesis, "reference": reference}
    parts = []
    for name in _SECTIONS[mode]:
        text = fields[name]
        if text is None:
            raise ValidationError(f"{mode.value} input requires a {name}")
        parts.append(f"{_PREFIX[name]} {text}" if text else _PREFIX[name])
    return " ".join(parts)


@dataclasses.dataclass(frozen=True)
class TrainingRecord:
    input_text: str
    target: TargetScore
    mode: InputMode
    stage: int
    provenance: str  # "DA", "MQM" or "SYNTHETIC:<category>"

    def to_dict(self) -> dict:
        return {
            "input": self.input_text,
            "target": self.target.value,
            "mode": self.mode.value,
            "stage": self.stage,
            "provenance": self.provenance,
        }


UNIFORM_MODES = {InputMode.QE: 1 / 3, InputMode.REF: 1 / 3, InputMode.SRC_REF: 1 / 3}
# The duplication set was generated but left out of the final mixtures.
DEFAULT_CATEGORIES = tuple(c for c in SyntheticCategory if c is not SyntheticCategory.DUPLICATION)


@dataclasses.dataclass(frozen=True)
class MixtureSpec:
    """How to assemble one training stage.

    synthetic_ratio is synthetic:real per category (1/100 means one
    synthetic example of each category per 100 real ones). da_mqm_ratio is
    DA:MQM for stage 2; None disables DA mixing.
    """

    stage: int
    synthetic_ratio: Fraction
    da_mqm_ratio: Fraction | None = None
    modes: Mapping[InputMode, float] = dataclasses.field(default_factory=lambda: dict(UNIFORM_MODES))
    seed: int = 0
    categories: tuple[SyntheticCategory, ...] = DEFAULT_CATEGORIES
    duplicate_all_modes: bool = False
    max_input_chars: int = 2000

    def __post_init__(self):
        if self.stage not in (1, 2):
            raise ValidationError(f"stage must be 1 or 2, got {self.stage}")
        if self.synthetic_ratio < 0:
            raise ValidationError("synthetic_ratio must be non-negative")
        if self.da_mqm_ratio is not None and self.da_mqm_ratio <= 0:
            raise ValidationError("da_mqm_ratio must be positive")
        if self.stage == 1 and self.da_mqm_ratio is not None:
            raise ValidationError("da_mqm_ratio applies to stage 2 only")
        weights = [w for w in self.modes.values()]
        if any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-9:
            raise ValidationError(f"mode weights must be non-negative and sum to 1, got {weights}")

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "synthetic_ratio": str(self.synthetic_ratio),
            "da_mqm_ratio": None if self.da_mqm_ratio is None else str(self.da_mqm_ratio),
            "modes": {m.value: w for m, w in sorted(self.modes.items(), key=lambda kv: kv[0].value)},
            "seed": self.seed,
            "categories": [c.value for c in self.categories],
            "duplicate_all_modes": self.duplicate_all_modes,
            "max_input_chars": self.max_input_chars,
        }


def stage1_spec(seed: int = 0, **overrides) -> MixtureSpec:
    overrides.setdefault("synthetic_ratio", Fraction(1, 100))
    return MixtureSpec(stage=1, seed=seed, **overrides)


def stage2_spec(seed: int = 0, **overrides) -> MixtureSpec:
    overrides.setdefault("da_mqm_ratio", Fraction(1, 4))
    overrides.setdefault("synthetic_ratio", Fraction(1, 5000))
    return MixtureSpec(stage=2, seed=seed, **overrides)


# Standalone (non-hybrid) variants: reference-based models still see the source.
PRESET_MODES = {
    "hybrid": dict(UNIFORM_MODES),
    "ref": {InputMode.SRC_REF: 1.0},
    "qe": {InputMode.QE: 1.0},
}


def allocate(n: int, weights: Mapping[InputMode, float]) -> dict[InputMode, int]:
    """Largest-remainder split of n items; each count is within 1 of n * w."""
    modes = sorted(weights, key=lambda m: m.value)
    exact = {m: n * weights[m] for m in modes}
    counts = {m: int(exact[m]) for m in modes}
    rest = n - sum(counts.values())
    order = sorted(modes, key=lambda m: (-(exact[m] - counts[m]), m.value))
    for m in order[:rest]:
        counts[m] += 1
    return counts


def _round_half_up(x: Fraction) -> int:
    return int(x + Fraction(1, 2)) if x >= 0 else -int(-x + Fraction(1, 2))


def resample(items: Sequence, n: int, rng: random.Random) -> list:
    """Exactly n items: without replacement when possible, else all items
    plus a with-replacement top-up."""
    if n <= len(items):
        return rng.sample(list(items), n)
    return list(items) + rng.choices(list(items), k=n - len(items))


@dataclasses.dataclass
class _Item:
    source: str | None
    hypothesis: str
    reference: str | None
    target: TargetScore
    provenance: str


def _fits(item: _Item, budget: int) -> bool:
    return len(serialize_input(item.source or "", item.hypothesis, item.reference or "", InputMode.SRC_REF)) <= budget


def _real_items(records: Iterable[RatedSegment], stage: int) -> tuple[list[_Item], list[_Item]]:
    """Split real records into (primary, da_for_stage2) with stage targets."""
    primary, extra_da = [], []
    for r in records:
        if stage == 1:
            if r.rating_kind is not RatingKind.DA_Z:
                raise ValidationError(
                    f"stage 1 needs z-normalized, aggregated DA records; got {r.rating_kind.value} "
                    f"(segment {r.segment_id!r})"
                )
            primary.append(_Item(r.source, r.hypothesis, r.reference, to_stage1_target(r.score), "DA"))
        elif r.rating_kind is RatingKind.MQM:
            primary.append(_Item(r.source, r.hypothesis, r.reference, TargetScore(r.score, TargetScale.MQM), "MQM"))
        elif r.rating_kind is RatingKind.DA_RAW:
            extra_da.append(_Item(r.source, r.hypothesis, r.reference, da_to_mqm(r.score), "DA"))
        else:
            raise ValidationError(
                f"stage 2 mixes raw DA rescaled to MQM; got {r.rating_kind.value} (segment {r.segment_id!r})"
            )
    return primary, extra_da


def _synthetic_item(ex: SyntheticExample, stage: int) -> _Item:
    if stage == 1:
        target = mqm_label_to_stage1(ex.label)
    else:
        target = TargetScore(ex.label, TargetScale.MQM)
    return _Item(ex.source, ex.hypothesis, ex.reference, target, f"SYNTHETIC:{ex.category.value}")


def assemble(
    records: Sequence[RatedSegment],
    synthetic: Sequence[SyntheticExample],
    spec: MixtureSpec,
) -> list[TrainingRecord]:
    """Build one stage's training mixture.

    Stage 1 takes aggregated DA_Z records. Stage 2 takes MQM records plus
    optional DA_RAW records, which are rescaled to MQM and resampled to
    DA:MQM = spec.da_mqm_ratio. Each synthetic category is resampled to
    round(n_real * synthetic_ratio). Records whose full input exceeds
    spec.max_input_chars are dropped before any counting.
    """
    rng = random.Random(spec.seed)
    primary, extra_da = _real_items(records, spec.stage)

    def within_budget(items: list[_Item], what: str) -> list[_Item]:
        kept = [it for it in items if _fits(it, spec.max_input_chars)]
        if len(kept) < len(items):
            warnings.warn(
                f"dropped {len(items) - len(kept)} {what} records over {spec.max_input_chars} chars",
                DataWarning,
            )
        return kept

    primary = within_budget(primary, "real")
    extra_da = within_budget(extra_da, "DA")
    if not primary:
        kind = "DA_Z" if spec.stage == 1 else "MQM"
        raise ValidationError(f"stage {spec.stage} mixture has no {kind} records; ratios unsatisfiable")

    real = list(primary)
    if spec.stage == 2 and spec.da_mqm_ratio is not None:
        if extra_da:
            n_da = _round_half_up(len(primary) * spec.da_mqm_ratio)
            real.extend(resample(extra_da, n_da, rng))
        else:
            warnings.warn("stage 2 mixture has no DA records; training on MQM only", DataWarning)
    elif extra_da:
        raise ValidationError("DA records supplied but da_mqm_ratio is disabled")

    by_category: dict[SyntheticCategory, list[_Item]] = {c: [] for c in spec.categories}
    for ex in synthetic:
        if ex.category in by_category:
            by_category[ex.category].append(_synthetic_item(ex, spec.stage))
    n_synth = _round_half_up(len(real) * spec.synthetic_ratio)
    mixed = list(real)
    for category in sorted(by_category, key=CATEGORY_ORDER.get):
        pool = within_budget(by_category[category], category.value)
        if n_synth and not pool:
            raise ValidationError(f"no synthetic {category.value} examples to mix in")
        mixed.extend(resample(pool, n_synth, rng))

    out = []
    active = [m for m in sorted(spec.modes, key=lambda m: m.value) if spec.modes[m] > 0]
    if spec.duplicate_all_modes:
        for it in mixed:
            for mode in active:
                out.append(_to_record(it, mode, spec.stage))
    else:
        counts = allocate(len(mixed), spec.modes)
        modes = [m for m in active for _ in range(counts[m])]
        rng.shuffle(modes)
        for it, mode in zip(mixed, modes):
            out.append(_to_record(it, mode, spec.stage))
    rng.shuffle(out)
    return out


def _to_record(item: _Item, mode: InputMode, stage: int) -> TrainingRecord:
    # Records without a reference can only be serialized reference-free.
    if item.reference is None and mode is not InputMode.QE:
        mode = InputMode.QE
    text = serialize_input(item.source, item.hypothesis, item.reference, mode)
    return TrainingRecord(text, item.target, mode, stage, item.provenance)


def save_mixture(records: Iterable[TrainingRecord], spec: MixtureSpec, path: str | os.PathLike) -> None:
    header = {
        "format": "mixture",
        "version": MIXTURE_FORMAT_VERSION,
        "input_format": INPUT_FORMAT,
        "spec": spec.to_dict(),
    }
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(json.dumps(header, ensure_ascii=False) + "\n")
        for r in records:
            f.write(json.dumps(r.to_dict(), ensure_ascii=False) + "\n")


def load_mixture(path: str | os.PathLike) -> tuple[dict, list[dict]]:
    with open(path, encoding="utf-8") as f:
        lines = [json.loads(line) for line in f if line.strip()]
    if not lines or lines[0].get("format") != "mixture":
        raise ValidationError(f"{path}: not a mixture file")
    return lines[0], lines[1:]

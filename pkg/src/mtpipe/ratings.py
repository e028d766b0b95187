"""Score transforms: per-rater z-normalization, per-segment aggregation,
stage-1 regression targets, and the DA to MQM rescaling."""

from __future__ import annotations

import dataclasses
import enum
import math
import warnings
from typing import Sequence

from mtpipe.corpus import RatedSegment, RatingKind
from mtpipe.errors import DataWarning, ValidationError

MQM_MAX = 25.0
DA_MAX = 100.0


class TargetScale(str, enum.Enum):
    STAGE1 = "STAGE1"  # [-1, 1], lower is better
    MQM = "MQM"  # [0, 25], lower is better


_BOUNDS = {TargetScale.STAGE1: (-1.0, 1.0), TargetScale.MQM: (0.0, MQM_MAX)}


@dataclasses.dataclass(frozen=True)
class TargetScore:
    value: float
    scale: TargetScale

    def __post_init__(self):
        lo, hi = _BOUNDS[self.scale]
        if not (math.isfinite(self.value) and lo <= self.value <= hi):
            raise ValidationError(f"{self.scale.value} target {self.value} outside [{lo}, {hi}]")


def znormalize_per_rater(records: Sequence[RatedSegment]) -> list[RatedSegment]:
    """Standardize raw DA scores within each rater's own ratings.

    Uses the population standard deviation. A rater whose scores are all
    equal gets z = 0 for every rating and a DataWarning.
    """
    groups: dict[str, list[int]] = {}
    for i, r in enumerate(records):
        if r.rating_kind is not RatingKind.DA_RAW:
            raise ValidationError(f"record {i + 1}: expected DA_RAW, got {r.rating_kind.value}")
        if r.rater_id is None:
            raise ValidationError(f"record {i + 1}: missing rater_id (segment {r.segment_id!r})")
        groups.setdefault(r.rater_id, []).append(i)

    z = [0.0] * len(records)
    for rater, idx in groups.items():
        scores = [records[i].score for i in idx]
        mean = math.fsum(scores) / len(scores)
        var = math.fsum((s - mean) ** 2 for s in scores) / len(scores)
        std = math.sqrt(var)
        if std == 0.0:
            warnings.warn(f"rater {rater!r} has zero score variance; assigning z = 0", DataWarning)
            continue
        for i, s in zip(idx, scores):
            z[i] = (s - mean) / std
    return [dataclasses.replace(r, score=v, rating_kind=RatingKind.DA_Z) for r, v in zip(records, z)]


def aggregate_per_segment(records: Sequence[RatedSegment]) -> list[RatedSegment]:
    """Average scores over raters for each (lp, segment_id, system_id).

    Output keeps first-appearance order of the keys; rater_id is cleared.
    """
    if not records:
        return []
    kinds = {r.rating_kind for r in records}
    if len(kinds) > 1:
        raise ValidationError(f"cannot aggregate mixed rating kinds: {sorted(k.value for k in kinds)}")
    groups: dict[tuple, list[RatedSegment]] = {}
    for r in records:
        groups.setdefault((r.lp, r.segment_id, r.system_id), []).append(r)
    out = []
    for members in groups.values():
        mean = math.fsum(m.score for m in members) / len(members)
        out.append(dataclasses.replace(members[0], score=mean, rater_id=None))
    return out


def to_stage1_target(z_score: float) -> TargetScore:
    if not math.isfinite(z_score):
        raise ValidationError(f"stage-1 target needs a finite z-score, got {z_score}")
    return TargetScore(min(1.0, max(-1.0, -z_score)), TargetScale.STAGE1)


def da_to_mqm(da_raw: float) -> TargetScore:
    """Affine map of a raw DA rating onto the MQM scale, flipping orientation."""
    if not (math.isfinite(da_raw) and 0.0 <= da_raw <= DA_MAX):
        raise ValidationError(f"DA score {da_raw} outside scale [0,100]")
    return TargetScore(MQM_MAX * (1.0 - da_raw / DA_MAX), TargetScale.MQM)


def mqm_to_da(mqm: float) -> float:
    """Inverse of `da_to_mqm`."""
    if not (math.isfinite(mqm) and 0.0 <= mqm <= MQM_MAX):
        raise ValidationError(f"MQM score {mqm} outside scale [0,25]")
    return DA_MAX * (1.0 - mqm / MQM_MAX)


def mqm_label_to_stage1(label: float) -> TargetScore:
    # Linear: MQM 0 (perfect) -> -1, MQM 25 (worst) -> +1.
    if not (math.isfinite(label) and 0.0 <= label <= MQM_MAX):
        raise ValidationError(f"MQM label {label} outside scale [0,25]")
    return TargetScore(2.0 * label / MQM_MAX - 1.0, TargetScale.STAGE1)

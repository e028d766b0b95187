"""Checkpoint selection by a weighted sum of segment- and system-level
pairwise accuracies."""

from __future__ import annotations

import dataclasses
import json
import math
import os
from pathlib import Path
from typing import Mapping, Sequence

from mtpipe.corpus import LanguagePair
from mtpipe.errors import ValidationError
from mtpipe.metaeval import EvalReport

DEFAULT_LPS = (LanguagePair("en", "de"), LanguagePair("en", "zh"), LanguagePair("zh", "en"))
SEG_WEIGHT = 0.75
SYS_WEIGHT = 0.25


@dataclasses.dataclass(frozen=True)
class CheckpointEval:
    checkpoint_id: str
    seg_acc: Mapping[LanguagePair, float]
    sys_acc: Mapping[LanguagePair, float]

    def __post_init__(self):
        for name, table in (("seg_acc", self.seg_acc), ("sys_acc", self.sys_acc)):
            for lp, v in table.items():
                if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                    raise ValidationError(f"{self.checkpoint_id}: {name}[{lp}] = {v} outside [0, 1]")

    @classmethod
    def from_reports(cls, checkpoint_id: str, reports: Sequence[EvalReport]) -> CheckpointEval:
        return cls(
            checkpoint_id,
            {r.lp: r.seg_acc for r in reports},
            {r.lp: r.sys_acc for r in reports},
        )


def score_checkpoint(ev: CheckpointEval, lps: Sequence[LanguagePair] = DEFAULT_LPS) -> float:
    missing = [str(lp) for lp in lps if lp not in ev.seg_acc or lp not in ev.sys_acc]
    if missing:
        raise ValidationError(f"checkpoint {ev.checkpoint_id!r} lacks results for {', '.join(missing)}")
    seg = math.fsum(ev.seg_acc[lp] for lp in lps)
    sys = math.fsum(ev.sys_acc[lp] for lp in lps)
    return SEG_WEIGHT * seg + SYS_WEIGHT * sys


def rank_checkpoints(
    evals: Sequence[CheckpointEval], lps: Sequence[LanguagePair] = DEFAULT_LPS
) -> list[tuple[str, float]]:
    """(checkpoint_id, score), best first; equal scores ordered by id."""
    scored = [(ev.checkpoint_id, score_checkpoint(ev, lps)) for ev in evals]
    return sorted(scored, key=lambda t: (-t[1], t[0]))


def select_best(evals: Sequence[CheckpointEval], lps: Sequence[LanguagePair] = DEFAULT_LPS) -> str:
    if not evals:
        raise ValidationError("no checkpoints to select from")
    return rank_checkpoints(evals, lps)[0][0]


def load_checkpoint_dir(directory: str | os.PathLike) -> list[CheckpointEval]:
    """Read `<checkpoint_id>.json` files, each a list of EvalReport objects
    (or {"reports": [...]})."""
    evals = []
    for path in sorted(Path(directory).glob("*.json")):
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
        if isinstance(data, dict):
            data = data.get("reports", [])
        reports = [EvalReport.from_dict(d) for d in data]
        evals.append(CheckpointEval.from_reports(path.stem, reports))
    if not evals:
        raise ValidationError(f"no checkpoint report files in {directory}")
    return evals


def format_ranking(ranking: Sequence[tuple[str, float]]) -> str:
    w = max([len("checkpoint")] + [len(c) for c, _ in ranking])
    lines = [f"{'rank':>4}  {'checkpoint':<{w}}  {'score':>8}"]
    lines += [f"{i:>4}  {c:<{w}}  {s:>8.4f}" for i, (c, s) in enumerate(ranking, start=1)]
    return "\n".join(lines) + "\n"

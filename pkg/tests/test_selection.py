import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from mtpipe.corpus import LanguagePair
from mtpipe.errors import ValidationError
from mtpipe.metaeval import EvalReport, TieThreshold
from mtpipe.selection import (
    DEFAULT_LPS,
    CheckpointEval,
    format_ranking,
    load_checkpoint_dir,
    rank_checkpoints,
    score_checkpoint,
    select_best,
)


def ckpt(cid, seg, sys):
    return CheckpointEval(cid, dict(zip(DEFAULT_LPS, seg)), dict(zip(DEFAULT_LPS, sys)))


def test_worked_example():
    assert abs(score_checkpoint(ckpt("a", [0.6, 0.5, 0.55], [0.9, 0.8, 0.85])) - 1.875) <= 1e-12


def test_bounds():
    assert score_checkpoint(ckpt("a", [0] * 3, [0] * 3)) == 0
    assert score_checkpoint(ckpt("a", [1] * 3, [1] * 3)) == 3.0


def test_missing_lp():
    ev = CheckpointEval("a", {DEFAULT_LPS[0]: 0.5}, {DEFAULT_LPS[0]: 0.5})
    with pytest.raises(ValidationError, match="en-zh"):
        score_checkpoint(ev)


def test_out_of_range_accuracy():
    with pytest.raises(ValidationError):
        ckpt("a", [1.2, 0, 0], [0, 0, 0])


def test_ties_go_to_smallest_id():
    evs = [ckpt("b", [0.5] * 3, [0.5] * 3), ckpt("a", [0.5] * 3, [0.5] * 3)]
    assert select_best(evs) == "a"


def test_empty():
    with pytest.raises(ValidationError):
        select_best([])


acc = st.floats(0, 1)


@settings(max_examples=100)
@given(st.lists(st.tuples(st.lists(acc, min_size=3, max_size=3), st.lists(acc, min_size=3, max_size=3)), min_size=1, max_size=8))
def test_select_best_is_argmax(rows):
    evs = [ckpt(f"c{i:02d}", seg, sys) for i, (seg, sys) in enumerate(rows)]
    scores = {e.checkpoint_id: 0.75 * sum(e.seg_acc.values()) + 0.25 * sum(e.sys_acc.values()) for e in evs}
    best = select_best(evs)
    assert scores[best] >= max(scores.values()) - 1e-12


def test_load_dir_and_format(tmp_path):
    for cid, v in (("step100", 0.6), ("step200", 0.7)):
        reports = [
            EvalReport(lp, v, 0.3, v, 0.8, TieThreshold(0.0, v), 10, 4).to_dict() for lp in DEFAULT_LPS
        ]
        payload = reports if cid == "step100" else {"reports": reports}
        (tmp_path / f"{cid}.json").write_text(json.dumps(payload))
    evs = load_checkpoint_dir(tmp_path)
    ranking = rank_checkpoints(evs)
    assert [c for c, _ in ranking] == ["step200", "step100"]
    assert ranking[0][1] == pytest.approx(2.1)
    text = format_ranking(ranking)
    assert text.splitlines()[1].split()[:2] == ["1", "step200"]
    with pytest.raises(ValidationError):
        load_checkpoint_dir(tmp_path / "nothing")

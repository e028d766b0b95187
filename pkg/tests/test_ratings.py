import math
import random
import warnings

import pytest
from hypothesis import given, strategies as st

from conftest import make_record
from mtpipe.corpus import RatingKind
from mtpipe.errors import DataWarning, ValidationError
from mtpipe.ratings import (
    TargetScale,
    TargetScore,
    aggregate_per_segment,
    da_to_mqm,
    mqm_label_to_stage1,
    mqm_to_da,
    to_stage1_target,
    znormalize_per_rater,
)


def da(score, rater="r1", seg="s1", system="sysA"):
    return make_record(score=score, rater=rater, seg=seg, system=system, kind=RatingKind.DA_RAW)


def test_two_scores_map_to_plus_minus_one():
    out = znormalize_per_rater([da(60, seg="a"), da(80, seg="b")])
    assert [r.score for r in out] == [-1.0, 1.0]
    assert all(r.rating_kind is RatingKind.DA_Z for r in out)


def test_zero_variance_rater_warns():
    with pytest.warns(DataWarning, match="zero score variance"):
        out = znormalize_per_rater([da(70, seg=str(i)) for i in range(3)])
    assert [r.score for r in out] == [0.0, 0.0, 0.0]


def test_raters_normalized_separately():
    recs = [da(0, "A", "1"), da(100, "A", "2"), da(50, "B", "1"), da(60, "B", "2")]
    assert [r.score for r in znormalize_per_rater(recs)] == [-1.0, 1.0, -1.0, 1.0]


def test_missing_rater_is_an_error():
    with pytest.raises(ValidationError, match="rater_id"):
        znormalize_per_rater([da(50, rater=None)])


def test_wrong_kind_is_an_error():
    with pytest.raises(ValidationError, match="DA_RAW"):
        znormalize_per_rater([make_record(score=3.0)])


def test_aggregate_mean_and_cleared_rater():
    recs = [make_record(score=0.2, rater="a", kind=RatingKind.MQM), make_record(score=0.4, rater="b", kind=RatingKind.MQM)]
    (out,) = aggregate_per_segment(recs)
    assert out.score == pytest.approx(0.3)
    assert out.rater_id is None


def test_aggregate_counts():
    recs = [make_record(seg="1", score=1.0), make_record(seg="1", score=3.0), make_record(seg="2", score=7.0)]
    out = aggregate_per_segment(recs)
    assert [(r.segment_id, r.score) for r in out] == [("1", 2.0), ("2", 7.0)]
    assert aggregate_per_segment([make_record(score=4.0)])[0].score == 4.0


def test_aggregate_rejects_mixed_kinds():
    with pytest.raises(ValidationError):
        aggregate_per_segment([make_record(), da(50)])


@pytest.mark.parametrize("z, expected", [(-1.0, 1.0), (2.5, -1.0), (0.3, -0.3), (-7.0, 1.0)])
def test_stage1_target(z, expected):
    t = to_stage1_target(z)
    assert t.value == pytest.approx(expected)
    assert t.scale is TargetScale.STAGE1


def test_stage1_target_rejects_nan():
    with pytest.raises(ValidationError):
        to_stage1_target(math.nan)


@pytest.mark.parametrize("x, expected", [(100, 0.0), (0, 25.0), (49, 12.75)])
def test_da_to_mqm(x, expected):
    assert da_to_mqm(x).value == expected


@pytest.mark.parametrize("x", [-0.1, 100.5, math.inf])
def test_da_to_mqm_range(x):
    with pytest.raises(ValidationError, match=r"\[0,100\]"):
        da_to_mqm(x)


def test_synthetic_label_map_endpoints():
    assert mqm_label_to_stage1(0).value == -1.0
    assert mqm_label_to_stage1(25).value == 1.0
    assert mqm_label_to_stage1(12.5).value == 0.0


def test_target_score_bounds():
    with pytest.raises(ValidationError):
        TargetScore(1.5, TargetScale.STAGE1)
    with pytest.raises(ValidationError):
        TargetScore(-0.5, TargetScale.MQM)


@given(st.floats(0, 100))
def test_da_roundtrip(x):
    assert abs(mqm_to_da(da_to_mqm(x).value) - x) <= 1e-9


@given(st.floats(0, 100), st.floats(0, 100))
def test_da_to_mqm_strictly_decreasing(a, b):
    if b - a > 1e-9:
        assert da_to_mqm(a).value > da_to_mqm(b).value


@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
def test_stage1_monotone_and_bounded(a, b):
    ta, tb = to_stage1_target(a).value, to_stage1_target(b).value
    assert -1.0 <= ta <= 1.0
    if a <= b:
        assert ta >= tb


@given(st.lists(st.tuples(st.sampled_from("ABC"), st.sampled_from("123"), st.integers(0, 100)), min_size=1, max_size=20), st.randoms())
def test_znorm_then_aggregate_is_permutation_invariant(rows, rnd):
    recs = [da(s, rater=r, seg=seg) for r, seg, s in rows]
    shuffled = list(recs)
    rnd.shuffle(shuffled)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DataWarning)
        a = aggregate_per_segment(znormalize_per_rater(recs))
        b = aggregate_per_segment(znormalize_per_rater(shuffled))
    key = lambda r: (r.segment_id, r.system_id)
    a, b = sorted(a, key=key), sorted(b, key=key)
    assert [key(r) for r in a] == [key(r) for r in b]
    assert all(abs(x.score - y.score) < 1e-9 for x, y in zip(a, b))


def test_znorm_moments_random_groups():
    rng = random.Random(3)
    recs = [da(rng.randint(0, 100), rater=f"r{i % 5}", seg=str(i)) for i in range(500)]
    out = znormalize_per_rater(recs)
    for rater in {r.rater_id for r in out}:
        zs = [r.score for r in out if r.rater_id == rater]
        mean = math.fsum(zs) / len(zs)
        std = math.sqrt(math.fsum((z - mean) ** 2 for z in zs) / len(zs))
        assert abs(mean) < 1e-9 and abs(std - 1) < 1e-9

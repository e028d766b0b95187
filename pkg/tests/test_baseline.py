import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_chrf_score
from mtpipe.baseline import BaselineConfig, BaselineScorer, baseline_score, char_ngrams, score_records
from mtpipe.corpus import Orientation
from mtpipe.errors import ValidationError
from conftest import make_record


def test_identical_is_perfect():
    assert baseline_score("The cat sat on the mat.", "The cat sat on the mat.") == 0.0


def test_empty_hypothesis_is_worst():
    assert baseline_score("", "The cat sat on the mat.") == 25.0


def test_empty_reference_raises():
    with pytest.raises(ValidationError):
        baseline_score("x", "")
    with pytest.raises(ValidationError):
        BaselineScorer()("s", "h", None)


def test_short_strings_never_reach_zero():
    # "ab" has no 3..6-grams, so those orders count as F = 0.
    assert baseline_score("ab", "ab") == pytest.approx(25 * (1 - 2 / 6))


def test_whitespace_is_ignored():
    assert char_ngrams("a b", 2) == char_ngrams("ab", 2)
    assert baseline_score("a  b c", "abc") == baseline_score("abc", "abc")


def test_config_validation():
    with pytest.raises(ValidationError):
        BaselineConfig(max_ngram=0)
    with pytest.raises(ValidationError):
        BaselineConfig(beta=0)


small = st.text(alphabet="abc d", max_size=20)


@settings(max_examples=200)
@given(small, small.filter(lambda s: s.strip()), st.integers(1, 3))
def test_matches_brute_force(hyp, ref, n):
    assert baseline_score(hyp, ref, BaselineConfig(max_ngram=n)) == pytest.approx(
        brute_chrf_score(hyp, ref, max_n=n), abs=1e-12
    )


@settings(max_examples=100)
@given(st.text(alphabet="abcdefg", min_size=2, max_size=30))
def test_prefix_truncation_strictly_worse(ref):
    scores = [baseline_score(ref[:k], ref) for k in range(len(ref) + 1)]
    assert all(a > b for a, b in zip(scores, scores[1:]))


def test_no_overlap_is_worst():
    assert baseline_score("xyz", "abc") == 25.0


def test_score_records():
    recs = [make_record(seg="1"), make_record(seg="2", hyp="Nothing alike")]
    ss = score_records(recs)
    assert ss.orientation is Orientation.LOWER_BETTER
    d = ss.as_dict()
    assert d[("1", "sysA")] == 0.0 and d[("2", "sysA")] > 10
    with pytest.raises(ValidationError):
        score_records([make_record(), make_record(lp="zh-en")])

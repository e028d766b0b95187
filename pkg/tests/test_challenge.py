import warnings

import pytest

from conftest import make_record, random_corpus
from mtpipe.baseline import BaselineScorer
from mtpipe.corpus import LanguagePair, Orientation
from mtpipe.errors import DataWarning, ValidationError
from mtpipe.challenge import (
    ChallengePair,
    GoodSide,
    Side,
    build_challenge,
    evaluate_challenge,
    format_challenge_table,
    load_challenge,
    save_challenge,
    score_pairs,
    scores_from_scoreset,
    to_scoreset,
)
from mtpipe.synthgen import PlanConfig, SyntheticCategory

C = SyntheticCategory
LP = LanguagePair("de", "en")


def pair(category, good=GoodSide.ORIGINAL, i=1):
    return ChallengePair(
        f"{category.value}:de-en:{i:05d}", category, LP, good,
        Side("s", "good hyp", "r"), Side("s", "bad hyp", "r"), "seg",
    )


def build(n=160, seed=0, **cfg):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DataWarning)
        return build_challenge(random_corpus(n, seed=seed), seed, PlanConfig(**cfg))


def test_build_pairs_sides():
    pairs = build()
    assert {p.category for p in pairs} == set(C)
    for p in pairs:
        if p.category is C.MISSING_PUNCT:
            assert p.original.hypothesis == p.original.reference
            assert p.synthetic.hypothesis != p.original.hypothesis
        if p.category is C.REF_MATCH:
            assert p.good_side is GoodSide.SYNTHETIC
            assert p.synthetic.hypothesis == p.synthetic.reference != p.original.hypothesis
        else:
            assert p.good_side is GoodSide.ORIGINAL
        assert p.original.source == p.synthetic.source


def test_pair_ids_unique_and_deterministic():
    a, b = build(seed=3), build(seed=3)
    assert a == b
    assert len({p.pair_id for p in a}) == len(a)


@pytest.mark.filterwarnings("ignore:.*eligible records")
def test_ref_match_skips_identical():
    rec = make_record(hyp="Same.", ref="Same.")
    with pytest.warns(DataWarning, match="pair skipped"):
        pairs = build_challenge([rec], 0, PlanConfig(categories=(C.REF_MATCH,)))
    assert pairs == []


def test_needs_references():
    with pytest.raises(ValidationError):
        build_challenge([make_record(ref=None)], 0)


def test_evaluate_strictly_better():
    pairs = [pair(C.EMPTY, i=1), pair(C.EMPTY, i=2), pair(C.REF_MATCH, GoodSide.SYNTHETIC)]
    # lower-better: good side must score strictly lower
    report = evaluate_challenge(pairs, [(1.0, 5.0), (3.0, 3.0), (4.0, 2.0)], Orientation.LOWER_BETTER)
    assert report[C.EMPTY].accuracy == 0.5
    assert report[C.EMPTY].mean_diff == 2.0
    assert report[C.REF_MATCH].accuracy == 1.0 and report[C.REF_MATCH].advisory
    assert report[C.GIBBERISH].n == 0 and report[C.GIBBERISH].accuracy is None
    assert report.to_dict()["gibberish"]["note"] == "no pairs"


def test_evaluate_orientation_flip():
    pairs = [pair(C.EMPTY, i=i) for i in range(4)]
    scores = [(1.0, 2.0), (2.0, 1.0), (0.0, 9.0), (4.0, 3.0)]
    a = evaluate_challenge(pairs, scores, Orientation.LOWER_BETTER)
    b = evaluate_challenge(pairs, [(-x, -y) for x, y in scores], Orientation.HIGHER_BETTER)
    assert a == b


def test_evaluate_skips_missing_scores():
    pairs = [pair(C.EMPTY, i=1), pair(C.EMPTY, i=2)]
    with pytest.warns(DataWarning, match="1 challenge pairs"):
        report = evaluate_challenge(pairs, [(1.0, None), (1.0, 2.0)], Orientation.LOWER_BETTER)
    assert report[C.EMPTY].n == 1


def test_evaluate_length_mismatch():
    with pytest.raises(ValidationError):
        evaluate_challenge([pair(C.EMPTY)], [], Orientation.LOWER_BETTER)


def test_baseline_scores_and_scoreset_roundtrip(tmp_path):
    pairs = build()
    scores = score_pairs(pairs, BaselineScorer())
    report = evaluate_challenge(pairs, scores, Orientation.LOWER_BETTER)
    empties = [(p, sc) for p, sc in zip(pairs, scores) if p.category is C.EMPTY]
    assert all(synth == 25.0 for _, (_, synth) in empties)
    # Only an original with zero overlap can tie the empty side at 25.
    wrong = [p for p, (orig, _) in empties if orig >= 25.0]
    assert report[C.EMPTY].accuracy == 1 - len(wrong) / len(empties)
    ss = to_scoreset(pairs, scores, Orientation.LOWER_BETTER, LP)
    assert scores_from_scoreset(pairs, ss) == [tuple(s) for s in scores]
    save_challenge(pairs, tmp_path / "c.jsonl")
    assert load_challenge(tmp_path / "c.jsonl") == pairs


def test_table_layout():
    report = evaluate_challenge([pair(C.EMPTY)], [(0.0, 1.0)], Orientation.LOWER_BETTER)
    lines = format_challenge_table([("baseline", report), ("other-variant", report)]).splitlines()
    assert "RefMatch*" in lines[0]
    assert len({len(l) for l in lines}) == 1
    assert "100.00" in lines[2] and "--" in lines[2]

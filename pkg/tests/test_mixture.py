import collections
import warnings
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_record
from mtpipe.corpus import LanguagePair, RatedSegment, RatingKind
from mtpipe.errors import DataWarning, ValidationError
from mtpipe.mixture import (
    DEFAULT_CATEGORIES,
    InputMode,
    MixtureSpec,
    allocate,
    assemble,
    load_mixture,
    save_mixture,
    serialize_input,
    stage1_spec,
    stage2_spec,
)
from mtpipe.synthgen import SyntheticCategory, SyntheticExample

DE_EN = LanguagePair("de", "en")


def real(n, kind, start=0):
    score = {RatingKind.DA_Z: 0.5, RatingKind.MQM: 3.0, RatingKind.DA_RAW: 70.0}[kind]
    return [
        RatedSegment(str(i), DE_EN, "sys", f"src {i}", f"hyp {i}", score, kind, reference=f"ref {i}")
        for i in range(start, start + n)
    ]


def synthetic(per_category=5, categories=tuple(SyntheticCategory)):
    labels = {SyntheticCategory.MISSING_PUNCT: 1.0, SyntheticCategory.REF_MATCH: 0.0, SyntheticCategory.UNDERTRANSLATION: 10.0}
    return [
        SyntheticExample(f"{c.value}{i}", DE_EN, c, "s", f"{c.value} {i}", "r", labels.get(c, 25.0))
        for c in categories
        for i in range(per_category)
    ]


def provenance_counts(out):
    return collections.Counter(r.provenance for r in out)


def test_serialize_formats():
    assert serialize_input("s", "h", "r", InputMode.SRC_REF) == "source: s candidate: h reference: r"
    assert serialize_input("s", "h", None, InputMode.QE) == "source: s candidate: h"
    assert serialize_input(None, "h", "r", InputMode.REF) == "candidate: h reference: r"
    assert serialize_input("s", "", "r", InputMode.SRC_REF) == "source: s candidate: reference: r"


def test_serialize_missing_field_names_mode():
    with pytest.raises(ValidationError, match="SRC_REF"):
        serialize_input(None, "h", "r", InputMode.SRC_REF)
    with pytest.raises(ValidationError, match="REF"):
        serialize_input("s", "h", None, InputMode.REF)


safe = st.text(st.characters(blacklist_characters=":"), max_size=12)


@given(safe, safe, safe, safe, safe, safe, st.sampled_from(list(InputMode)))
def test_serialize_injective(s1, h1, r1, s2, h2, r2, mode):
    a, b = serialize_input(s1, h1, r1, mode), serialize_input(s2, h2, r2, mode)
    used = {InputMode.QE: (0, 1), InputMode.REF: (1, 2), InputMode.SRC_REF: (0, 1, 2)}[mode]
    t1, t2 = (s1, h1, r1), (s2, h2, r2)
    if any(t1[i] != t2[i] for i in used):
        # Injectivity holds when the texts themselves contain no section markers.
        if not any(p in x for x in t1 + t2 for p in ("source", "candidate", "reference")):
            assert a != b


@pytest.mark.parametrize("n, w", [(9999, None), (10, None), (7, {InputMode.QE: 0.5, InputMode.REF: 0.25, InputMode.SRC_REF: 0.25})])
def test_allocate(n, w):
    weights = w or {m: 1 / 3 for m in InputMode}
    counts = allocate(n, weights)
    assert sum(counts.values()) == n
    assert all(abs(counts[m] - n * weights[m]) <= 1 for m in weights)


def test_stage1_counts():
    out = assemble(real(10_000, RatingKind.DA_Z), synthetic(), stage1_spec(seed=3))
    counts = provenance_counts(out)
    assert len(out) == 10_600
    assert counts["DA"] == 10_000
    for c in DEFAULT_CATEGORIES:
        assert counts[f"SYNTHETIC:{c.value}"] == 100
    assert "SYNTHETIC:duplication" not in counts
    assert all(-1 <= r.target.value <= 1 for r in out)


def test_stage1_modes_roughly_uniform():
    out = assemble(real(9_999, RatingKind.DA_Z), [], stage1_spec(seed=1, synthetic_ratio=Fraction(0)))
    modes = collections.Counter(r.mode for r in out)
    assert all(abs(modes[m] - 3333) <= 1 for m in InputMode)


def test_stage2_da_ratio():
    records = real(8_000, RatingKind.MQM) + real(5_000, RatingKind.DA_RAW, start=10_000)
    out = assemble(records, synthetic(), stage2_spec(seed=9))
    counts = provenance_counts(out)
    assert counts["MQM"] == 8_000 and counts["DA"] == 2_000
    for c in DEFAULT_CATEGORIES:
        assert counts[f"SYNTHETIC:{c.value}"] == 2  # 10,000 / 5000
    assert all(0 <= r.target.value <= 25 for r in out)


def test_stage2_da_upsampled_when_short():
    records = real(800, RatingKind.MQM) + real(50, RatingKind.DA_RAW, start=5000)
    out = assemble(records, [], stage2_spec(seed=1, synthetic_ratio=Fraction(0)))
    assert provenance_counts(out)["DA"] == 200


def test_stage1_rejects_raw_da():
    with pytest.raises(ValidationError, match="z-normalized"):
        assemble(real(10, RatingKind.DA_RAW), [], stage1_spec())


def test_zero_real_records():
    with pytest.raises(ValidationError, match="unsatisfiable"):
        assemble([], synthetic(), stage1_spec())


def test_missing_synthetic_category():
    with pytest.raises(ValidationError, match="no synthetic"):
        assemble(real(200, RatingKind.DA_Z), synthetic(categories=(SyntheticCategory.EMPTY,)), stage1_spec())


def test_duplicate_all_modes():
    out = assemble(real(10, RatingKind.DA_Z), [], stage1_spec(synthetic_ratio=Fraction(0), duplicate_all_modes=True))
    assert len(out) == 30


def test_no_reference_falls_back_to_qe():
    recs = [make_record(ref=None, seg=str(i), score=0.1, kind=RatingKind.DA_Z) for i in range(30)]
    out = assemble(recs, [], stage1_spec(synthetic_ratio=Fraction(0)))
    assert {r.mode for r in out} == {InputMode.QE}


def test_length_budget_drops_before_counting():
    recs = real(100, RatingKind.DA_Z) + [
        RatedSegment("long", DE_EN, "sys", "x" * 3000, "h", 0.0, RatingKind.DA_Z, reference="r")
    ]
    with pytest.warns(DataWarning, match="dropped 1"):
        out = assemble(recs, synthetic(), stage1_spec())
    assert provenance_counts(out)["DA"] == 100
    assert provenance_counts(out)["SYNTHETIC:empty"] == 1


def test_spec_validation():
    with pytest.raises(ValidationError):
        MixtureSpec(stage=3, synthetic_ratio=Fraction(0))
    with pytest.raises(ValidationError):
        stage1_spec(modes={InputMode.QE: 0.5})
    with pytest.raises(ValidationError):
        MixtureSpec(stage=1, synthetic_ratio=Fraction(1, 100), da_mqm_ratio=Fraction(1, 4))


def test_same_seed_byte_identical(tmp_path):
    records = real(500, RatingKind.DA_Z)
    spec = stage1_spec(seed=42)
    paths = []
    for name in ("a", "b"):
        p = tmp_path / f"{name}.jsonl"
        save_mixture(assemble(records, synthetic(), spec), spec, p)
        paths.append(p)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    other = tmp_path / "c.jsonl"
    save_mixture(assemble(records, synthetic(), stage1_spec(seed=43)), spec, other)
    assert other.read_bytes() != paths[0].read_bytes()
    header, rows = load_mixture(paths[0])
    assert header["input_format"]["SRC_REF"] == "source: {source} candidate: {hypothesis} reference: {reference}"
    assert len(rows) == 530  # 500 real + 5 per active category


@settings(max_examples=20, deadline=None)
@given(st.integers(100, 3000), st.integers(0, 10**6))
def test_counts_within_one(n, seed):
    out = assemble(real(n, RatingKind.DA_Z), synthetic(), stage1_spec(seed=seed))
    counts = provenance_counts(out)
    for c in DEFAULT_CATEGORIES:
        assert abs(counts[f"SYNTHETIC:{c.value}"] - n / 100) <= 1

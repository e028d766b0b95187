"""Synthetic failure-mode examples built from rated WMT-style segments.

Each generator takes one origin record and returns a SyntheticExample
labelled on the MQM scale, or None when the record is not eligible.
`sample_plan` draws origin records per language pair (per end-punctuation
symbol for MISSING_PUNCT) and runs the generators with seeds derived from
(seed, category, stratum), so output depends only on corpus and seed.
"""

from __future__ import annotations

import collections
import dataclasses
import enum
import hashlib
import json
import math
import os
import random
import re
import warnings
from typing import Iterable, Sequence

from mtpipe.corpus import LanguagePair, RatedSegment
from mtpipe.errors import DataWarning, ValidationError

# Default end-punctuation set; 11 symbols.
DEFAULT_END_PUNCT = (".", "?", "!", ")", "]", '"', "'", "。", "？", "！", "»")

# Latin terminators need following whitespace (keeps "2.4" whole); CJK ones do not.
SENTENCE_END = re.compile(r"[.?!](?=\s|$)|[。？！]+")
_WORD = re.compile(r"\S+")

PER_LP_SAMPLES = 500
PER_SYMBOL_SAMPLES = 250
UNRELATED_LENGTH_WINDOW = 0.2


class SyntheticCategory(str, enum.Enum):
    EMPTY = "empty"
    GIBBERISH = "gibberish"
    UNRELATED = "unrelated"
    UNDERTRANSLATION = "undertranslation"
    DUPLICATION = "duplication"
    MISSING_PUNCT = "missing_punct"
    REF_MATCH = "ref_match"

    def label_ok(self, label: float, duplication_label: float = 25.0) -> bool:
        """Whether `label` obeys this category's labelling rule."""
        if self is SyntheticCategory.UNDERTRANSLATION:
            return 5.0 <= label <= 25.0
        if self is SyntheticCategory.DUPLICATION:
            return label == duplication_label
        return label == FIXED_LABELS[self]


FIXED_LABELS = {
    SyntheticCategory.EMPTY: 25.0,
    SyntheticCategory.GIBBERISH: 25.0,
    SyntheticCategory.UNRELATED: 25.0,
    SyntheticCategory.DUPLICATION: 25.0,
    SyntheticCategory.MISSING_PUNCT: 1.0,
    SyntheticCategory.REF_MATCH: 0.0,
}

CATEGORY_ORDER = {c: i for i, c in enumerate(SyntheticCategory)}

# Categories whose synthetic hypothesis is derived from the reference.
FROM_REFERENCE = frozenset({SyntheticCategory.MISSING_PUNCT, SyntheticCategory.REF_MATCH})


@dataclasses.dataclass(frozen=True)
class SyntheticExample:
    origin_segment_id: str
    lp: LanguagePair
    category: SyntheticCategory
    source: str
    hypothesis: str
    reference: str | None
    label: float
    seed_trace: int = 0
    origin_system_id: str | None = None

    def to_dict(self) -> dict:
        d = {
            "origin_segment_id": self.origin_segment_id,
            "origin_system_id": self.origin_system_id,
            "lp": str(self.lp),
            "category": self.category.value,
            "source": self.source,
            "hypothesis": self.hypothesis,
            "reference": self.reference,
            "label": self.label,
            "seed_trace": self.seed_trace,
        }
        return {k: v for k, v in d.items() if v is not None}

    @classmethod
    def from_dict(cls, d: dict) -> SyntheticExample:
        return cls(
            origin_segment_id=d["origin_segment_id"],
            lp=LanguagePair.parse(d["lp"]),
            category=SyntheticCategory(d["category"]),
            source=d["source"],
            hypothesis=d["hypothesis"],
            reference=d.get("reference"),
            label=float(d["label"]),
            seed_trace=int(d.get("seed_trace", 0)),
            origin_system_id=d.get("origin_system_id"),
        )


@dataclasses.dataclass(frozen=True)
class TargetVocabulary:
    target_lang: str
    words: tuple[str, ...]  # multiset in corpus order; sampling is frequency weighted

    def counts(self) -> collections.Counter:
        return collections.Counter(self.words)


def derive_seed(seed: int, *parts: object) -> int:
    """Stable 63-bit seed from a base seed and labels (independent of PYTHONHASHSEED)."""
    text = "\x1f".join([str(seed), *(str(p) for p in parts)])
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big") >> 1


def _example(record: RatedSegment, category, hypothesis, label, seed_trace=0) -> SyntheticExample:
    return SyntheticExample(
        origin_segment_id=record.segment_id,
        lp=record.lp,
        category=category,
        source=record.source,
        hypothesis=hypothesis,
        reference=record.reference,
        label=float(label),
        seed_trace=seed_trace,
        origin_system_id=record.system_id,
    )


def build_vocabulary(records: Iterable[RatedSegment], target_lang: str) -> TargetVocabulary:
    words: list[str] = []
    found = False
    for r in records:
        if r.lp.target_lang == target_lang and r.reference is not None:
            found = True
            words.extend(r.reference.split())
    if not found:
        raise ValidationError(f"no references with target language {target_lang!r}")
    return TargetVocabulary(target_lang, tuple(words))


def gen_empty(record: RatedSegment, seed_trace: int = 0) -> SyntheticExample:
    if record.reference is None:
        raise ValidationError(f"segment {record.segment_id!r} has no reference")
    return _example(record, SyntheticCategory.EMPTY, "", 25.0, seed_trace)


def gen_gibberish(
    record: RatedSegment, vocab: TargetVocabulary, rng: random.Random, seed_trace: int = 0
) -> SyntheticExample:
    if vocab.target_lang != record.lp.target_lang:
        raise ValidationError(
            f"vocabulary is for {vocab.target_lang!r}, record targets {record.lp.target_lang!r}"
        )
    if not vocab.words:
        raise ValidationError(f"empty vocabulary for {vocab.target_lang!r}")
    if record.reference is None:
        raise ValidationError(f"segment {record.segment_id!r} has no reference")
    n = len(record.reference.split())
    hyp = " ".join(rng.choices(vocab.words, k=n))
    return _example(record, SyntheticCategory.GIBBERISH, hyp, 25.0, seed_trace)


def gen_unrelated(
    record: RatedSegment,
    pool: Sequence[str],
    rng: random.Random,
    seed_trace: int = 0,
    window: float = UNRELATED_LENGTH_WINDOW,
) -> SyntheticExample:
    """Swap in another reference of similar character length.

    Candidates equal to the record's own reference are never chosen. The
    relative length window doubles until some candidate fits.
    """
    if record.reference is None:
        raise ValidationError(f"segment {record.segment_id!r} has no reference")
    candidates = [p for p in pool if p != record.reference]
    if not candidates:
        raise ValidationError(f"no unrelated reference available for segment {record.segment_id!r}")
    length = len(record.reference)
    while True:
        lo, hi = length * (1.0 - window), length * (1.0 + window)
        fits = [p for p in candidates if lo <= len(p) <= hi]
        if fits:
            break
        window *= 2.0
    return _example(record, SyntheticCategory.UNRELATED, rng.choice(fits), 25.0, seed_trace)


def split_sentences(text: str) -> list[str]:
    """Split into sentence chunks, each keeping its trailing whitespace.

    "".join(split_sentences(t)) == t for every t.
    """
    chunks = []
    start = 0
    for m in SENTENCE_END.finditer(text):
        end = m.end()
        while end < len(text) and text[end].isspace():
            end += 1
        chunks.append(text[start:end])
        start = end
    if start < len(text):
        chunks.append(text[start:])
    return chunks


def undertranslation_label(removed_fraction: float) -> float:
    """MQM label for a hypothesis missing `removed_fraction` of its words."""
    return min(25.0, max(5.0, 25.0 * removed_fraction))


def gen_undertranslation(
    record: RatedSegment, rng: random.Random, seed_trace: int = 0
) -> SyntheticExample | None:
    """Drop one sentence, or 20-80% of the words from the end.

    Returns None (with a DataWarning) for hypotheses of fewer than two words.
    """
    hyp = record.hypothesis
    spans = [m.span() for m in _WORD.finditer(hyp)]
    n = len(spans)
    if n < 2:
        warnings.warn(
            f"segment {record.segment_id!r}: hypothesis too short for undertranslation; skipped",
            DataWarning,
        )
        return None
    sentences = split_sentences(hyp)
    if len(sentences) >= 2:
        drop = rng.randrange(len(sentences))
        kept = sentences[:drop] + sentences[drop + 1:]
        new_hyp = "".join(kept)
        if drop == len(sentences) - 1:
            new_hyp = new_hyp.rstrip()
        removed = len(sentences[drop].split())
    else:
        fraction = rng.uniform(0.2, 0.8)
        removed = min(n - 1, max(1, math.floor(fraction * n + 0.5)))
        new_hyp = hyp[: spans[n - removed - 1][1]]
    label = undertranslation_label(removed / n)
    return _example(record, SyntheticCategory.UNDERTRANSLATION, new_hyp, label, seed_trace)


def gen_duplication(record: RatedSegment, label: float = 25.0, seed_trace: int = 0) -> SyntheticExample:
    if not record.hypothesis:
        raise ValidationError(f"segment {record.segment_id!r} has an empty hypothesis")
    hyp = record.hypothesis + " " + record.hypothesis
    return _example(record, SyntheticCategory.DUPLICATION, hyp, label, seed_trace)


def end_symbol(text: str | None, symbols: Sequence[str] = DEFAULT_END_PUNCT) -> str | None:
    if not text:
        return None
    return text[-1] if text[-1] in symbols else None


def gen_missing_punct(
    record: RatedSegment, symbols: Sequence[str] = DEFAULT_END_PUNCT, seed_trace: int = 0
) -> SyntheticExample | None:
    """Reference minus its final punctuation symbol; None if it has none."""
    if end_symbol(record.reference, symbols) is None:
        return None
    hyp = record.reference[:-1].rstrip()
    return _example(record, SyntheticCategory.MISSING_PUNCT, hyp, 1.0, seed_trace)


def gen_refmatch(record: RatedSegment, seed_trace: int = 0) -> SyntheticExample:
    if record.reference is None:
        raise ValidationError(f"segment {record.segment_id!r} has no reference")
    return _example(record, SyntheticCategory.REF_MATCH, record.reference, 0.0, seed_trace)


def _eligible(category: SyntheticCategory, r: RatedSegment) -> bool:
    if r.reference is None:
        return False
    if category is SyntheticCategory.GIBBERISH:
        return bool(r.reference.split())
    if category is SyntheticCategory.UNDERTRANSLATION:
        return len(r.hypothesis.split()) >= 2
    if category is SyntheticCategory.DUPLICATION:
        return bool(r.hypothesis)
    return True


@dataclasses.dataclass
class PlanConfig:
    categories: tuple[SyntheticCategory, ...] = tuple(SyntheticCategory)
    per_lp: int = PER_LP_SAMPLES
    per_symbol: int = PER_SYMBOL_SAMPLES
    punct_symbols: tuple[str, ...] = DEFAULT_END_PUNCT
    duplication_label: float = 25.0
    unrelated_window: float = UNRELATED_LENGTH_WINDOW


@dataclasses.dataclass
class PlanLog:
    """Counts and warnings gathered while running a sampling plan."""

    counts: dict[str, int] = dataclasses.field(default_factory=dict)
    warnings: list[str] = dataclasses.field(default_factory=list)

    def warn(self, message: str) -> None:
        self.warnings.append(message)
        warnings.warn(message, DataWarning)


def sample_plan(
    records: Sequence[RatedSegment],
    seed: int,
    config: PlanConfig | None = None,
    log: PlanLog | None = None,
) -> list[SyntheticExample]:
    """Draw origin records and generate synthetic examples for each category.

    Non-punctuation categories: up to `per_lp` eligible records per language
    pair, uniformly without replacement. MISSING_PUNCT: up to `per_symbol`
    records per end symbol, pooled across language pairs. Output is sorted
    by (category, lp, origin_segment_id); ties keep sampling order.
    """
    config = config or PlanConfig()
    log = log if log is not None else PlanLog()
    by_lp: dict[LanguagePair, list[RatedSegment]] = {}
    for r in records:
        by_lp.setdefault(r.lp, []).append(r)

    vocabularies: dict[str, TargetVocabulary] = {}
    pools: dict[str, list[str]] = {}
    for r in records:
        if r.reference is not None:
            pools.setdefault(r.lp.target_lang, []).append(r.reference)
    # Distinct references, first-appearance order.
    pools = {lang: list(dict.fromkeys(refs)) for lang, refs in pools.items()}

    out: list[SyntheticExample] = []
    for category in config.categories:
        if category is SyntheticCategory.MISSING_PUNCT:
            continue
        for lp in sorted(by_lp):
            eligible = [r for r in by_lp[lp] if _eligible(category, r)]
            stratum_seed = derive_seed(seed, category.value, lp)
            rng = random.Random(stratum_seed)
            k = min(config.per_lp, len(eligible))
            if k < config.per_lp:
                log.warn(
                    f"{category.value}/{lp}: only {len(eligible)} eligible records "
                    f"(wanted {config.per_lp})"
                )
            chosen = rng.sample(eligible, k)
            made = 0
            for r in chosen:
                ex = _generate(category, r, rng, stratum_seed, records, vocabularies, pools, config, log)
                if ex is not None:
                    out.append(ex)
                    made += 1
            log.counts[f"{category.value}/{lp}"] = made

    if SyntheticCategory.MISSING_PUNCT in config.categories:
        by_symbol: dict[str, list[RatedSegment]] = {s: [] for s in config.punct_symbols}
        for r in records:
            sym = end_symbol(r.reference, config.punct_symbols)
            if sym is not None:
                by_symbol[sym].append(r)
        for sym in config.punct_symbols:
            stratum_seed = derive_seed(seed, SyntheticCategory.MISSING_PUNCT.value, "symbol", sym)
            rng = random.Random(stratum_seed)
            pool = by_symbol[sym]
            k = min(config.per_symbol, len(pool))
            if k < config.per_symbol:
                log.warn(
                    f"missing_punct/{sym!r}: only {len(pool)} eligible records "
                    f"(wanted {config.per_symbol})"
                )
            for r in rng.sample(pool, k):
                out.append(gen_missing_punct(r, config.punct_symbols, stratum_seed))
            log.counts[f"missing_punct/{sym}"] = k

    out.sort(key=lambda e: (CATEGORY_ORDER[e.category], e.lp, e.origin_segment_id))
    return out


def _generate(category, r, rng, stratum_seed, records, vocabularies, pools, config, log):
    C = SyntheticCategory
    if category is C.EMPTY:
        return gen_empty(r, stratum_seed)
    if category is C.REF_MATCH:
        return gen_refmatch(r, stratum_seed)
    if category is C.DUPLICATION:
        return gen_duplication(r, config.duplication_label, stratum_seed)
    if category is C.GIBBERISH:
        lang = r.lp.target_lang
        if lang not in vocabularies:
            vocabularies[lang] = build_vocabulary(records, lang)
        return gen_gibberish(r, vocabularies[lang], rng, stratum_seed)
    if category is C.UNRELATED:
        pool = pools.get(r.lp.target_lang, [])
        if not any(p != r.reference for p in pool):
            log.warn(f"unrelated/{r.lp}: no other reference for segment {r.segment_id!r}; skipped")
            return None
        return gen_unrelated(r, pool, rng, stratum_seed, config.unrelated_window)
    if category is C.UNDERTRANSLATION:
        return gen_undertranslation(r, rng, stratum_seed)
    raise ValueError(f"unhandled category {category}")


def save_synthetic(examples: Iterable[SyntheticExample], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        for ex in examples:
            f.write(json.dumps(ex.to_dict(), ensure_ascii=False) + "\n")


def load_synthetic(path: str | os.PathLike) -> list[SyntheticExample]:
    with open(path, encoding="utf-8") as f:
        return [SyntheticExample.from_dict(json.loads(line)) for line in f if line.strip()]


def check_label(example: SyntheticExample, duplication_label: float = 25.0) -> bool:
    return example.category.label_ok(example.label, duplication_label)


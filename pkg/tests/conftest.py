import random
from pathlib import Path

import pytest

from mtpipe.corpus import LanguagePair, RatedSegment, RatingKind

TOY_CORPUS = Path(__file__).resolve().parent.parent / "src" / "mtpipe" / "data" / "toy_corpus.jsonl"

WORDS = (
    "the a house city train report meeting river board price market school "
    "garden window teacher letter morning evening quickly slowly green old new "
    "small large open closed bright north south after before under over"
).split()
ENDINGS = [".", "?", "!", ")", '"', "»", "。", ""]


def make_record(
    hyp="The cat sat on the mat.",
    ref="The cat sat on the mat.",
    *,
    seg="s1",
    system="sysA",
    lp="de-en",
    score=5.0,
    kind=RatingKind.MQM,
    rater=None,
    src="Die Katze saß auf der Matte.",
):
    return RatedSegment(
        segment_id=seg,
        lp=LanguagePair.parse(lp),
        system_id=system,
        source=src,
        hypothesis=hyp,
        score=score,
        rating_kind=kind,
        reference=ref,
        rater_id=rater,
    )


def _sentence(rng, n_words):
    words = [rng.choice(WORDS) for _ in range(n_words)]
    words[0] = words[0].capitalize()
    return " ".join(words) + rng.choice(ENDINGS)


def random_corpus(n, seed, lps=("de-en", "zh-en", "en-de", "ja-en"), kind=RatingKind.MQM):
    """n random rated segments spread over `lps`, 4 systems per segment."""
    rng = random.Random(seed)
    records = []
    i = 0
    while len(records) < n:
        i += 1
        lp = lps[i % len(lps)]
        n_sent = rng.choice([1, 1, 2, 3])
        ref = " ".join(_sentence(rng, rng.randint(1, 14)) for _ in range(n_sent))
        src = _sentence(rng, rng.randint(2, 12))
        for s in range(4):
            if len(records) == n:
                break
            hyp = " ".join(_sentence(rng, rng.randint(1, 14)) for _ in range(rng.choice([1, 2])))
            score = float(rng.randint(0, 25)) if kind is RatingKind.MQM else float(rng.randint(0, 100))
            records.append(
                RatedSegment(
                    segment_id=f"seg{i}",
                    lp=LanguagePair.parse(lp),
                    system_id=f"sys{s}",
                    source=src,
                    hypothesis=hyp,
                    score=score,
                    rating_kind=kind,
                    reference=ref,
                    rater_id=f"r{rng.randint(1, 3)}" if kind is RatingKind.DA_RAW else None,
                )
            )
    return records


@pytest.fixture
def toy_corpus_path():
    return TOY_CORPUS


# Acceptance verdicts, printed as one line each at the end of the run.
ACCEPTANCE: list[tuple[str, bool, str]] = []


class criterion:
    """Context manager recording PASS/FAIL for one acceptance criterion."""

    def __init__(self, label, title):
        self.label, self.title = label, title
        self.detail = ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        ok = exc_type is None
        detail = self.detail if ok else f"{exc_type.__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        ACCEPTANCE.append((self.label, ok, f"{self.title} | {detail}"))
        return False


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, text in sorted(ACCEPTANCE, key=lambda t: t[0]):
        terminalreporter.write_line(f"criterion {label}: {'PASS' if ok else 'FAIL'} | {text}")

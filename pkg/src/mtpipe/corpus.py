"""Rated segments, metric score sets, and their on-disk formats.

Ratings are persisted as JSONL (one object per line, UTF-8, first line a
header object). TSV with a header row is read for ingestion and can be
written back when no field contains a tab or newline. Score files are JSONL
whose first line declares the language pair and score orientation.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
import os
import re
from typing import Any, Iterable, Sequence

from mtpipe.errors import ValidationError

RATINGS_FORMAT_VERSION = 1

COLUMNS = (
    "lp",
    "domain",
    "year",
    "segment_id",
    "system_id",
    "rater_id",
    "source",
    "hypothesis",
    "reference",
    "score",
    "rating_kind",
)

_LANG_RE = re.compile(r"^[a-z]+$")


class RatingKind(str, enum.Enum):
    DA_RAW = "DA_RAW"
    DA_Z = "DA_Z"
    MQM = "MQM"


class Orientation(str, enum.Enum):
    LOWER_BETTER = "LOWER_BETTER"
    HIGHER_BETTER = "HIGHER_BETTER"

    def align(self, value: float) -> float:
        """Map a score onto a higher-is-better axis (exact for floats)."""
        return -value if self is Orientation.LOWER_BETTER else value

    def flipped(self) -> Orientation:
        if self is Orientation.LOWER_BETTER:
            return Orientation.HIGHER_BETTER
        return Orientation.LOWER_BETTER


def orientation_of(kind: RatingKind) -> Orientation:
    if kind is RatingKind.MQM:
        return Orientation.LOWER_BETTER
    return Orientation.HIGHER_BETTER


@dataclasses.dataclass(frozen=True, order=True)
class LanguagePair:
    source_lang: str
    target_lang: str

    def __post_init__(self):
        for code in (self.source_lang, self.target_lang):
            if not isinstance(code, str) or not code.isascii() or not _LANG_RE.match(code):
                raise ValidationError(
                    f"language code must be non-empty lowercase ASCII, got {code!r}"
                )

    @classmethod
    def parse(cls, text: str) -> LanguagePair:
        parts = text.split("-")
        if len(parts) != 2:
            raise ValidationError(f"language pair must look like 'xx-yy', got {text!r}")
        return cls(parts[0], parts[1])

    def __str__(self) -> str:
        return f"{self.source_lang}-{self.target_lang}"


@dataclasses.dataclass(frozen=True)
class RatedSegment:
    """One human-rated translation.

    `reference` is None when the record has no reference; an empty string
    is a real (empty) reference and is kept distinct.
    """

    segment_id: str
    lp: LanguagePair
    system_id: str
    source: str
    hypothesis: str
    score: float
    rating_kind: RatingKind
    reference: str | None = None
    domain: str | None = None
    rater_id: str | None = None
    year: int | None = None

    def __post_init__(self):
        validate_score(self.score, self.rating_kind)
        object.__setattr__(self, "score", float(self.score))

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {}
        for key in COLUMNS:
            value = getattr(self, key)
            if value is None:
                continue
            if key == "lp":
                value = str(value)
            elif key == "rating_kind":
                value = value.value
            d[key] = value
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any], *, allow_empty_hypothesis: bool = False) -> RatedSegment:
        return _record_from_fields(d, allow_empty_hypothesis=allow_empty_hypothesis)


def validate_score(score: float, kind: RatingKind) -> None:
    if not isinstance(score, (int, float)) or isinstance(score, bool) or not math.isfinite(score):
        raise ValidationError(f"score must be a finite number, got {score!r}")
    if kind is RatingKind.DA_RAW and not 0.0 <= score <= 100.0:
        raise ValidationError(f"DA_RAW score {score} outside scale [0,100]")
    if kind is RatingKind.MQM and not 0.0 <= score <= 25.0:
        raise ValidationError(f"MQM score {score} outside scale [0,25]")


class _FieldError(ValidationError):
    def __init__(self, field: str, message: str):
        super().__init__(message)
        self.field = field


def _record_from_fields(d: dict[str, Any], *, allow_empty_hypothesis: bool) -> RatedSegment:
    def required_str(key: str) -> str:
        value = d.get(key)
        if value is None:
            raise _FieldError(key, f"missing required field {key!r}")
        if not isinstance(value, str):
            raise _FieldError(key, f"field {key!r} must be a string")
        return value

    def optional_str(key: str) -> str | None:
        value = d.get(key)
        if value is not None and not isinstance(value, str):
            raise _FieldError(key, f"field {key!r} must be a string")
        return value

    try:
        lp = LanguagePair.parse(required_str("lp"))
    except _FieldError:
        raise
    except ValidationError as e:
        raise _FieldError("lp", str(e)) from None

    kind_text = required_str("rating_kind")
    try:
        kind = RatingKind(kind_text)
    except ValueError:
        raise _FieldError("rating_kind", f"unknown rating_kind {kind_text!r}") from None

    score = d.get("score")
    if isinstance(score, str):
        try:
            score = float(score)
        except ValueError:
            raise _FieldError("score", f"score {score!r} is not a number") from None
    if score is None:
        raise _FieldError("score", "missing required field 'score'")
    try:
        validate_score(score, kind)
    except ValidationError as e:
        raise _FieldError("score", str(e)) from None

    year = d.get("year")
    if isinstance(year, str):
        try:
            year = int(year)
        except ValueError:
            raise _FieldError("year", f"year {year!r} is not an integer") from None
    if year is not None and (not isinstance(year, int) or isinstance(year, bool)):
        raise _FieldError("year", "field 'year' must be an integer")

    hypothesis = required_str("hypothesis")
    if hypothesis == "" and not allow_empty_hypothesis:
        raise _FieldError("hypothesis", "empty hypothesis is only allowed for synthetic records")

    return RatedSegment(
        segment_id=required_str("segment_id"),
        lp=lp,
        system_id=required_str("system_id"),
        source=required_str("source"),
        hypothesis=hypothesis,
        score=float(score),
        rating_kind=kind,
        reference=optional_str("reference"),
        domain=optional_str("domain"),
        rater_id=optional_str("rater_id"),
        year=year,
    )


def _row_error(row: int, e: ValidationError) -> ValidationError:
    field = getattr(e, "field", None)
    where = f"row {row}" + (f", field {field!r}" if field else "")
    return ValidationError(f"{where}: {e}")


def _is_ratings_header(obj: dict[str, Any]) -> bool:
    return "format" in obj and "segment_id" not in obj


def load_ratings(
    path: str | os.PathLike,
    format: str = "jsonl",
    *,
    allow_empty_hypothesis: bool = False,
) -> list[RatedSegment]:
    """Load rated segments, validating every row.

    Row numbers in error messages are 1-based data rows (headers excluded).
    """
    fmt = format.lower()
    with open(path, encoding="utf-8", newline="") as f:
        text = f.read()
    if fmt == "jsonl":
        return _load_jsonl(text, allow_empty_hypothesis)
    if fmt == "tsv":
        return _load_tsv(text, allow_empty_hypothesis)
    raise ValidationError(f"unknown ratings format {format!r} (expected TSV or JSONL)")


def _load_jsonl(text: str, allow_empty_hypothesis: bool) -> list[RatedSegment]:
    records = []
    row = 0
    for line_no, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise ValidationError(f"line {line_no}: invalid JSON ({e.msg})") from None
        if not isinstance(obj, dict):
            raise ValidationError(f"line {line_no}: expected a JSON object")
        if line_no == 1 and _is_ratings_header(obj):
            if obj.get("format") != "ratings":
                raise ValidationError(f"not a ratings file (format={obj.get('format')!r})")
            continue
        row += 1
        try:
            records.append(_record_from_fields(obj, allow_empty_hypothesis=allow_empty_hypothesis))
        except ValidationError as e:
            raise _row_error(row, e) from None
    return records


def _load_tsv(text: str, allow_empty_hypothesis: bool) -> list[RatedSegment]:
    if not text:
        return []
    # QUOTE_NONE: quotes in source/reference text are data, not syntax.
    reader = csv.reader(io.StringIO(text), delimiter="\t", quoting=csv.QUOTE_NONE)
    rows = iter(reader)
    header = next(rows, None)
    if header is None:
        return []
    missing = [c for c in COLUMNS if c not in header]
    if missing:
        raise ValidationError(f"TSV header missing columns: {', '.join(missing)}")
    index = {name: i for i, name in enumerate(header)}
    records = []
    for row, cells in enumerate(rows, start=1):
        if not cells:
            continue
        if len(cells) != len(header):
            raise ValidationError(
                f"row {row}: expected {len(header)} fields, got {len(cells)}"
            )
        d: dict[str, Any] = {}
        for name in COLUMNS:
            value = cells[index[name]]
            if value == "" and name in ("domain", "year", "rater_id", "reference"):
                continue
            d[name] = value
        try:
            records.append(_record_from_fields(d, allow_empty_hypothesis=allow_empty_hypothesis))
        except ValidationError as e:
            raise _row_error(row, e) from None
    return records


def _dump_line(obj: dict[str, Any]) -> str:
    return json.dumps(obj, ensure_ascii=False, allow_nan=False) + "\n"


def save_ratings(records: Iterable[RatedSegment], path: str | os.PathLike, format: str = "jsonl") -> None:
    """Write records; JSONL is canonical, TSV is written for interchange.

    TSV cannot represent tabs or newlines inside text, nor distinguish an
    empty reference from a missing one; such records are rejected.
    """
    fmt = format.lower()
    records = list(records)
    if fmt == "jsonl":
        out = [_dump_line({"format": "ratings", "version": RATINGS_FORMAT_VERSION})]
        out.extend(_dump_line(r.to_dict()) for r in records)
    elif fmt == "tsv":
        out = ["\t".join(COLUMNS) + "\n"]
        for i, r in enumerate(records, start=1):
            d = r.to_dict()
            cells = []
            for name in COLUMNS:
                value = d.get(name)
                cell = "" if value is None else str(value) if not isinstance(value, float) else repr(value)
                if any(ch in cell for ch in "\t\n\r"):
                    raise ValidationError(f"record {i}: field {name!r} contains a tab or newline")
                cells.append(cell)
            if r.reference == "":
                raise ValidationError(f"record {i}: TSV cannot encode an empty reference")
            out.append("\t".join(cells) + "\n")
    else:
        raise ValidationError(f"unknown ratings format {format!r} (expected TSV or JSONL)")
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.writelines(out)


@dataclasses.dataclass(frozen=True)
class ScoreEntry:
    segment_id: str
    system_id: str
    score: float


@dataclasses.dataclass(frozen=True)
class ScoreSet:
    lp: LanguagePair
    entries: tuple[ScoreEntry, ...]
    orientation: Orientation

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            key = (e.segment_id, e.system_id)
            if key in seen:
                raise ValidationError(f"duplicate score key (segment_id={key[0]!r}, system_id={key[1]!r})")
            if not math.isfinite(e.score):
                raise ValidationError(f"non-finite score for {key}")
            seen.add(key)

    def as_dict(self) -> dict[tuple[str, str], float]:
        return {(e.segment_id, e.system_id): e.score for e in self.entries}

    def negated(self) -> ScoreSet:
        """Same ranking information with the opposite declared orientation."""
        return ScoreSet(
            self.lp,
            tuple(ScoreEntry(e.segment_id, e.system_id, -e.score) for e in self.entries),
            self.orientation.flipped(),
        )


def load_scores(path: str | os.PathLike) -> ScoreSet:
    with open(path, encoding="utf-8") as f:
        lines = [(i, line) for i, line in enumerate(f, start=1) if line.strip()]
    if not lines:
        raise ValidationError("score file is empty; a header with lp and orientation is required")
    try:
        header = json.loads(lines[0][1])
    except json.JSONDecodeError as e:
        raise ValidationError(f"line 1: invalid JSON ({e.msg})") from None
    if not isinstance(header, dict) or "orientation" not in header:
        raise ValidationError(
            "score file header must declare 'orientation' (LOWER_BETTER or HIGHER_BETTER)"
        )
    if "lp" not in header:
        raise ValidationError("score file header must declare 'lp'")
    try:
        orientation = Orientation(header["orientation"])
    except ValueError:
        raise ValidationError(f"unknown orientation {header['orientation']!r}") from None
    lp = LanguagePair.parse(header["lp"])

    entries = []
    for line_no, line in lines[1:]:
        try:
            obj = json.loads(line)
            entry = ScoreEntry(str(obj["segment_id"]), str(obj["system_id"]), float(obj["score"]))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"line {line_no}: malformed score entry ({e})") from None
        entries.append(entry)
    return ScoreSet(lp, tuple(entries), orientation)


def save_scores(scores: ScoreSet, path: str | os.PathLike) -> None:
    out = [_dump_line({"lp": str(scores.lp), "orientation": scores.orientation.value})]
    out.extend(
        _dump_line({"segment_id": e.segment_id, "system_id": e.system_id, "score": e.score})
        for e in scores.entries
    )
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.writelines(out)


def split_by_lp(records: Sequence[RatedSegment]) -> dict[LanguagePair, list[RatedSegment]]:
    """Group records by language pair, keeping input order inside each group."""
    groups: dict[LanguagePair, list[RatedSegment]] = {}
    for r in records:
        groups.setdefault(r.lp, []).append(r)
    return groups


def swap_references(records: Sequence[RatedSegment], alternates: dict[str, str]) -> list[RatedSegment]:
    """Replace references by segment id (alternate-reference evaluation).

    Segments absent from `alternates` keep their original reference.
    """
    return [
        dataclasses.replace(r, reference=alternates[r.segment_id]) if r.segment_id in alternates else r
        for r in records
    ]

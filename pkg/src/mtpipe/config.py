"""Pipeline configuration stored as a flat `key = value` text file.

Lines starting with '#' are comments. A `version` key is mandatory.
List values are comma separated, except `punct_symbols`, which is space
separated (commas are not among the defaults, but quotes are).
"""

from __future__ import annotations

import dataclasses
import hashlib
from fractions import Fraction

from mtpipe.corpus import LanguagePair
from mtpipe.errors import ValidationError
from mtpipe.mixture import DEFAULT_CATEGORIES, UNIFORM_MODES, InputMode
from mtpipe.selection import DEFAULT_LPS
from mtpipe.synthgen import DEFAULT_END_PUNCT, SyntheticCategory

CONFIG_VERSION = 1


@dataclasses.dataclass
class PipelineConfig:
    seed: int | None = None
    output_dir: str = "."
    punct_symbols: tuple[str, ...] = DEFAULT_END_PUNCT
    per_lp_samples: int = 500
    per_symbol_samples: int = 250
    duplication_label: float = 25.0
    synth_categories: tuple[SyntheticCategory, ...] = tuple(SyntheticCategory)
    stage1_synthetic_ratio: Fraction = Fraction(1, 100)
    stage2_synthetic_ratio: Fraction = Fraction(1, 5000)
    da_mqm_ratio: Fraction = Fraction(1, 4)
    mix_categories: tuple[SyntheticCategory, ...] = DEFAULT_CATEGORIES
    mode_weights: dict = dataclasses.field(default_factory=lambda: dict(UNIFORM_MODES))
    duplicate_all_modes: bool = False
    max_input_chars: int = 2000
    lp_filter: tuple[LanguagePair, ...] = ()
    selection_lps: tuple[LanguagePair, ...] = DEFAULT_LPS
    baseline_max_ngram: int = 6
    baseline_beta: float = 2.0

    def to_text(self) -> str:
        lines = [f"version = {CONFIG_VERSION}"]
        for f in dataclasses.fields(self):
            lines.append(f"{f.name} = {_format(f.name, getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> PipelineConfig:
        values: dict[str, str] = {}
        for n, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValidationError(f"config line {n}: expected 'key = value'")
            key = key.strip()
            if key in values:
                raise ValidationError(f"config line {n}: duplicate key {key!r}")
            values[key] = value.strip()
        if "version" not in values:
            raise ValidationError("config is missing the 'version' key")
        if values.pop("version") != str(CONFIG_VERSION):
            raise ValidationError(f"unsupported config version (expected {CONFIG_VERSION})")
        return cls().updated(values)

    def updated(self, values: dict[str, str]) -> PipelineConfig:
        """Copy with the given textual values parsed and applied."""
        names = {f.name for f in dataclasses.fields(self)}
        parsed = {}
        for key, value in values.items():
            if key not in names:
                raise ValidationError(f"unknown config key {key!r}")
            try:
                parsed[key] = _parse(key, value)
            except (ValueError, KeyError, ZeroDivisionError) as e:
                raise ValidationError(f"config key {key!r}: cannot parse {value!r} ({e})") from None
        return dataclasses.replace(self, **parsed)

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()


def _format(name: str, value) -> str:
    if value is None:
        return ""
    if name == "punct_symbols":
        return " ".join(value)
    if name == "mode_weights":
        return ",".join(f"{m.value}:{value[m]!r}" for m in sorted(value, key=lambda m: m.value))
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(v.value if isinstance(v, SyntheticCategory) else str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(name: str, text: str):
    if name == "seed":
        return int(text) if text else None
    if name == "output_dir":
        return text
    if name == "punct_symbols":
        return tuple(text.split())
    if name in ("synth_categories", "mix_categories"):
        return tuple(SyntheticCategory(t.strip()) for t in text.split(",") if t.strip())
    if name in ("lp_filter", "selection_lps"):
        return tuple(LanguagePair.parse(t.strip()) for t in text.split(",") if t.strip())
    if name.endswith("_ratio"):
        return Fraction(text)
    if name == "mode_weights":
        weights = {}
        for item in text.split(","):
            mode, _, w = item.partition(":")
            weights[InputMode(mode.strip())] = float(w)
        return weights
    if name == "duplicate_all_modes":
        if text.lower() not in ("true", "false"):
            raise ValueError("expected true or false")
        return text.lower() == "true"
    if name in ("per_lp_samples", "per_symbol_samples", "max_input_chars", "baseline_max_ngram"):
        return int(text)
    return float(text)


def load_config(path) -> PipelineConfig:
    with open(path, encoding="utf-8") as f:
        return PipelineConfig.from_text(f.read())

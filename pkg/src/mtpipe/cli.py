"""Command-line entry point: `mtpipe <command> [options]`.

Every command writes its artifact plus `<artifact>.manifest.json`
recording the command, config digest, seed, and SHA-256 digests of inputs
and outputs. Exit status: 0 success, 1 validation error, 2 I/O error,
64 usage error. Logs go to stderr; data only to files.

Environment: MTPIPE_OUTPUT_DIR (relative outputs land here),
MTPIPE_LOG_LEVEL (default INFO).
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import os
import sys
import warnings
from pathlib import Path
from typing import Sequence

from mtpipe import baseline, challenge, corpus, metaeval, mixture, ratings, selection, synthgen
from mtpipe.config import PipelineConfig, load_config
from mtpipe.corpus import LanguagePair, RatingKind
from mtpipe.errors import DataWarning, ValidationError

log = logging.getLogger("mtpipe")

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_USAGE = 0, 1, 2, 64
MULTI_LP = LanguagePair("mul", "mul")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


@dataclasses.dataclass
class Run:
    command: str
    config: PipelineConfig
    out_dir: Path
    inputs: list[Path] = dataclasses.field(default_factory=list)
    outputs: list[Path] = dataclasses.field(default_factory=list)
    counts: dict = dataclasses.field(default_factory=dict)
    notes: list[str] = dataclasses.field(default_factory=list)

    def input(self, path: str) -> Path:
        p = Path(path)
        self.inputs.append(p)
        return p

    def output(self, path: str) -> Path:
        p = Path(path)
        if not p.is_absolute():
            p = self.out_dir / p
        p.parent.mkdir(parents=True, exist_ok=True)
        self.outputs.append(p)
        return p

    def seed(self) -> int:
        if self.config.seed is None:
            raise ValidationError(f"'{self.command}' generates data and requires a seed (--seed or config)")
        return self.config.seed

    def write_manifest(self) -> Path:
        manifest = {
            "command": self.command,
            "config_sha256": self.config.digest(),
            "config": self.config.to_text(),
            "seed": self.config.seed,
            "inputs": {str(p): _sha256(p) for p in self.inputs},
            "outputs": {str(p): _sha256(p) for p in self.outputs},
            "counts": self.counts,
            "warnings": self.notes,
        }
        path = self.outputs[0].with_name(self.outputs[0].name + ".manifest.json")
        with open(path, "w", encoding="utf-8") as f:
            json.dump(manifest, f, ensure_ascii=False, indent=2, sort_keys=True)
            f.write("\n")
        return path


def _load(run: Run, path: str, fmt: str = "jsonl", **kw) -> list[corpus.RatedSegment]:
    records = corpus.load_ratings(run.input(path), fmt, **kw)
    if run.config.lp_filter:
        keep = set(run.config.lp_filter)
        records = [r for r in records if r.lp in keep]
    return records


def _plan_config(cfg: PipelineConfig) -> synthgen.PlanConfig:
    return synthgen.PlanConfig(
        categories=cfg.synth_categories,
        per_lp=cfg.per_lp_samples,
        per_symbol=cfg.per_symbol_samples,
        punct_symbols=cfg.punct_symbols,
        duplication_label=cfg.duplication_label,
    )


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, ensure_ascii=False, indent=2)
        f.write("\n")


def cmd_ingest(run: Run, args) -> None:
    records = _load(run, args.input, args.format, allow_empty_hypothesis=args.allow_empty_hypothesis)
    corpus.save_ratings(records, run.output(args.output))
    run.counts["records"] = len(records)


def cmd_normalize(run: Run, args) -> None:
    records = _load(run, args.input)
    if args.transform in ("znorm", "znorm-aggregate"):
        records = ratings.znormalize_per_rater(records)
    if args.transform in ("aggregate", "znorm-aggregate"):
        records = ratings.aggregate_per_segment(records)
    corpus.save_ratings(records, run.output(args.output))
    run.counts["records"] = len(records)


def cmd_synth(run: Run, args) -> None:
    records = _load(run, args.input)
    plan_log = synthgen.PlanLog()
    examples = synthgen.sample_plan(records, run.seed(), _plan_config(run.config), plan_log)
    synthgen.save_synthetic(examples, run.output(args.output))
    run.counts.update(plan_log.counts)
    run.notes.extend(plan_log.warnings)


def cmd_build_challenge(run: Run, args) -> None:
    records = _load(run, args.input)
    pairs = challenge.build_challenge(records, run.seed(), _plan_config(run.config))
    challenge.save_challenge(pairs, run.output(args.output))
    for p in pairs:
        run.counts[p.category.value] = run.counts.get(p.category.value, 0) + 1


def _stage1_records(records):
    kinds = {r.rating_kind for r in records}
    if kinds == {RatingKind.DA_RAW}:
        records = ratings.znormalize_per_rater(records)
    elif kinds != {RatingKind.DA_Z}:
        raise ValidationError(f"stage 1 needs DA ratings, got {sorted(k.value for k in kinds)}")
    return ratings.aggregate_per_segment(records)


def cmd_mix(run: Run, args) -> None:
    cfg = run.config
    seed = run.seed()
    modes = mixture.PRESET_MODES[args.preset] if args.preset else cfg.mode_weights
    common = dict(
        modes=modes,
        categories=cfg.mix_categories,
        duplicate_all_modes=cfg.duplicate_all_modes,
        max_input_chars=cfg.max_input_chars,
    )
    if args.stage == 1:
        if not args.da:
            raise ValidationError("mix --stage 1 requires --da ratings")
        records = _stage1_records(_load(run, args.da))
        spec = mixture.stage1_spec(seed, synthetic_ratio=cfg.stage1_synthetic_ratio, **common)
    else:
        if not args.mqm:
            raise ValidationError("mix --stage 2 requires --mqm ratings")
        records = _load(run, args.mqm)
        if {r.rating_kind for r in records} != {RatingKind.MQM}:
            raise ValidationError("--mqm input must contain only MQM ratings")
        if args.da:
            da = _load(run, args.da)
            if {r.rating_kind for r in da} != {RatingKind.DA_RAW}:
                raise ValidationError("stage 2 --da input must contain raw DA ratings")
            records = records + ratings.aggregate_per_segment(da)
        spec = mixture.stage2_spec(
            seed,
            synthetic_ratio=cfg.stage2_synthetic_ratio,
            da_mqm_ratio=cfg.da_mqm_ratio if args.da else None,
            **common,
        )
    synthetic = synthgen.load_synthetic(run.input(args.synthetic)) if args.synthetic else []
    out = mixture.assemble(records, synthetic, spec)
    mixture.save_mixture(out, spec, run.output(args.output))
    for r in out:
        run.counts[r.provenance] = run.counts.get(r.provenance, 0) + 1


def cmd_score_baseline(run: Run, args) -> None:
    cfg = baseline.BaselineConfig(run.config.baseline_max_ngram, run.config.baseline_beta)
    if args.challenge:
        pairs = challenge.load_challenge(run.input(args.challenge))
        side_scores = challenge.score_pairs(pairs, baseline.BaselineScorer(cfg))
        lps = {p.lp for p in pairs}
        lp = lps.pop() if len(lps) == 1 else MULTI_LP
        scores = challenge.to_scoreset(pairs, side_scores, corpus.Orientation.LOWER_BETTER, lp)
    else:
        records = _load(run, args.input)
        lp = LanguagePair.parse(args.lp) if args.lp else None
        scores = baseline.score_records(records, cfg, lp)
    corpus.save_scores(scores, run.output(args.output))
    run.counts["scores"] = len(scores.entries)


def cmd_eval(run: Run, args) -> None:
    records = _load(run, args.ratings)
    reports = []
    for path in args.scores:
        scores = corpus.load_scores(run.input(path))
        reports.append(metaeval.evaluate(records, scores))
    _write_json(run.output(args.output), {"variant": args.variant, "reports": [r.to_dict() for r in reports]})
    if args.table:
        rows = [(args.variant, reports)]
        text = metaeval.format_table(rows, "accuracy") + "\n" + metaeval.format_table(rows, "pearson")
        run.output(args.table).write_text(text, encoding="utf-8")


def cmd_challenge_eval(run: Run, args) -> None:
    pairs = challenge.load_challenge(run.input(args.challenge))
    scores = corpus.load_scores(run.input(args.scores))
    report = challenge.evaluate_challenge(
        pairs, challenge.scores_from_scoreset(pairs, scores), scores.orientation
    )
    _write_json(run.output(args.output), {"variant": args.variant, "challenge": report.to_dict()})
    if args.table:
        run.output(args.table).write_text(
            challenge.format_challenge_table([(args.variant, report)]), encoding="utf-8"
        )


def cmd_select_checkpoint(run: Run, args) -> None:
    directory = Path(args.dir)
    for p in sorted(directory.glob("*.json")):
        run.inputs.append(p)
    evals = selection.load_checkpoint_dir(directory)
    ranking = selection.rank_checkpoints(evals, run.config.selection_lps)
    _write_json(
        run.output(args.output),
        {"best": ranking[0][0], "ranking": [{"checkpoint_id": c, "score": s} for c, s in ranking]},
    )
    if args.table:
        run.output(args.table).write_text(selection.format_ranking(ranking), encoding="utf-8")


def cmd_report(run: Run, args) -> None:
    eval_rows, challenge_rows = [], []
    for path in args.inputs:
        with open(run.input(path), encoding="utf-8") as f:
            data = json.load(f)
        name = data.get("variant") or Path(path).stem
        if "reports" in data:
            eval_rows.append((name, [metaeval.EvalReport.from_dict(d) for d in data["reports"]]))
        elif "challenge" in data:
            challenge_rows.append((name, _challenge_report_from_dict(data["challenge"])))
        else:
            raise ValidationError(f"{path}: neither an eval nor a challenge report")
    parts = []
    if eval_rows:
        parts += [metaeval.format_table(eval_rows, "accuracy"), metaeval.format_table(eval_rows, "pearson")]
    if challenge_rows:
        parts.append(challenge.format_challenge_table(challenge_rows))
    run.output(args.output).write_text("\n".join(parts), encoding="utf-8")


def _challenge_report_from_dict(d: dict) -> challenge.ChallengeReport:
    results = []
    for cat in sorted(synthgen.SyntheticCategory, key=synthgen.CATEGORY_ORDER.get):
        item = d.get(cat.value, {"n": 0, "accuracy": None, "mean_diff": None})
        results.append(
            challenge.CategoryResult(
                cat, item["n"], item["accuracy"], item["mean_diff"], item.get("advisory", False)
            )
        )
    return challenge.ChallengeReport(tuple(results))


COMMANDS = {
    "ingest": cmd_ingest,
    "normalize": cmd_normalize,
    "synth": cmd_synth,
    "build-challenge": cmd_build_challenge,
    "mix": cmd_mix,
    "score-baseline": cmd_score_baseline,
    "eval": cmd_eval,
    "challenge-eval": cmd_challenge_eval,
    "select-checkpoint": cmd_select_checkpoint,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mtpipe", description="MT metric training-data and meta-evaluation pipeline.")
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--seed", type=int, help="overrides the config seed")
    parser.add_argument("--output-dir", help="base directory for relative output paths")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    p = sub.add_parser("ingest", help="validate ratings and write canonical JSONL")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["tsv", "jsonl"], default="tsv")
    p.add_argument("--output", required=True)
    p.add_argument("--allow-empty-hypothesis", action="store_true")

    p = sub.add_parser("normalize", help="z-normalize per rater and/or aggregate per segment")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--transform", choices=["znorm", "aggregate", "znorm-aggregate"], default="znorm-aggregate")

    for name, help_text in (("synth", "generate synthetic failure-mode examples"),
                            ("build-challenge", "build the paired synthetic challenge set")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--input", required=True)
        p.add_argument("--output", required=True)

    p = sub.add_parser("mix", help="assemble a stage-1 or stage-2 training mixture")
    p.add_argument("--stage", type=int, choices=[1, 2], required=True)
    p.add_argument("--da")
    p.add_argument("--mqm")
    p.add_argument("--synthetic")
    p.add_argument("--preset", choices=sorted(mixture.PRESET_MODES))
    p.add_argument("--output", required=True)

    p = sub.add_parser("score-baseline", help="score ratings or a challenge set with the lexical baseline")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input")
    src.add_argument("--challenge")
    p.add_argument("--lp")
    p.add_argument("--output", required=True)

    p = sub.add_parser("eval", help="segment/system accuracy and Pearson for metric scores")
    p.add_argument("--ratings", required=True)
    p.add_argument("--scores", required=True, nargs="+")
    p.add_argument("--variant", default="metric")
    p.add_argument("--output", required=True)
    p.add_argument("--table")

    p = sub.add_parser("challenge-eval", help="per-category accuracy on a challenge set")
    p.add_argument("--challenge", required=True)
    p.add_argument("--scores", required=True)
    p.add_argument("--variant", default="metric")
    p.add_argument("--output", required=True)
    p.add_argument("--table")

    p = sub.add_parser("select-checkpoint", help="pick the best checkpoint from EvalReport files")
    p.add_argument("--dir", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--table")

    p = sub.add_parser("report", help="combine eval/challenge reports into text tables")
    p.add_argument("--inputs", required=True, nargs="+")
    p.add_argument("--output", required=True)
    return parser


def _resolve_config(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    overrides = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ValidationError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value.strip()
    cfg = cfg.updated(overrides)
    if os.environ.get("MTPIPE_OUTPUT_DIR"):
        cfg = dataclasses.replace(cfg, output_dir=os.environ["MTPIPE_OUTPUT_DIR"])
    if args.output_dir:
        cfg = dataclasses.replace(cfg, output_dir=args.output_dir)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    return cfg


def run(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("MTPIPE_LOG_LEVEL", "INFO").upper(),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            parser.error("a command is required")
    except UsageError as e:
        print(f"mtpipe: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = _resolve_config(args)
        job = Run(args.command, cfg, Path(cfg.output_dir))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", DataWarning)
            COMMANDS[args.command](job, args)
        for w in caught:
            if issubclass(w.category, DataWarning):
                msg = str(w.message)
                log.warning(msg)
                if msg not in job.notes:
                    job.notes.append(msg)
        manifest = job.write_manifest()
        log.info("%s: wrote %s (+ %s)", args.command, ", ".join(map(str, job.outputs)), manifest.name)
    except (ValidationError, ValueError, KeyError) as e:
        log.error("%s: %s", args.command, e)
        return EXIT_VALIDATION
    except OSError as e:
        log.error("%s: %s", args.command, e)
        return EXIT_IO
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

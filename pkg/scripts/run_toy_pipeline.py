"""Run the whole pipeline on the bundled toy corpus with the lexical baseline.

Writes synthetic data, both training mixtures, the challenge set, metric
scores and reports under --out, then prints the meta-evaluation and
challenge tables.

    python scripts/run_toy_pipeline.py [--out runs/toy] [--seed 13]
"""

import argparse
import time
import warnings
from pathlib import Path

from mtpipe import baseline, challenge, corpus, metaeval, mixture, ratings, synthgen
from mtpipe.corpus import RatingKind
from mtpipe.errors import DataWarning

TOY = Path(__file__).resolve().parent.parent / "src" / "mtpipe" / "data" / "toy_corpus.jsonl"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--corpus", default=str(TOY))
    ap.add_argument("--out", default="runs/toy")
    ap.add_argument("--seed", type=int, default=13)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    warnings.simplefilter("ignore", DataWarning)
    start = time.perf_counter()

    records = corpus.load_ratings(args.corpus)
    da = [r for r in records if r.rating_kind is RatingKind.DA_RAW]
    mqm = [r for r in records if r.rating_kind is RatingKind.MQM]
    print(f"loaded {len(records)} records: {len(da)} DA, {len(mqm)} MQM")

    synthetic = synthgen.sample_plan(records, args.seed)
    synthgen.save_synthetic(synthetic, out / "synthetic.jsonl")
    print(f"synthetic examples: {len(synthetic)}")

    stage1 = ratings.aggregate_per_segment(ratings.znormalize_per_rater(da))
    spec1 = mixture.stage1_spec(args.seed)
    mixture.save_mixture(mixture.assemble(stage1, synthetic, spec1), spec1, out / "stage1.jsonl")
    spec2 = mixture.stage2_spec(args.seed)
    mix2 = mixture.assemble(mqm + ratings.aggregate_per_segment(da), synthetic, spec2)
    mixture.save_mixture(mix2, spec2, out / "stage2.jsonl")

    reports = []
    for lp, group in sorted(corpus.split_by_lp(records).items()):
        scores = baseline.score_records(group)
        corpus.save_scores(scores, out / f"scores.{lp}.jsonl")
        reports.append(metaeval.evaluate(group, scores))
    print()
    print(metaeval.format_table([("baseline", reports)], "accuracy"))
    print(metaeval.format_table([("baseline", reports)], "pearson"))

    pairs = challenge.build_challenge(records, args.seed)
    challenge.save_challenge(pairs, out / "challenge.jsonl")
    report = challenge.evaluate_challenge(
        pairs, challenge.score_pairs(pairs, baseline.BaselineScorer()), corpus.Orientation.LOWER_BETTER
    )
    print(challenge.format_challenge_table([("baseline", report)]))
    print(f"done in {time.perf_counter() - start:.2f}s; artifacts in {out}")


if __name__ == "__main__":
    main()

"""Fine-tuning behavior of the built-in trainable backend, end to end.

Produces the two standard adaptation views:

  local   target-token probability / rank after each fine-tune step, for a
          handful of (sequence, target) probes
  global  train/test perplexity after fine-tuning on growing slices of a
          corpus split

Outputs land in --out-dir as JSON report envelopes plus CSV siblings.

Run from anywhere: python3 scripts/adaptation_curves.py --out-dir runs/adapt
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from beamtree.analysis import (  # noqa: E402
    adaptation_to_csv,
    curve_to_csv,
    global_adaptation_report,
    local_adaptation_report,
    report_to_json,
)
from beamtree.backends import FineTuneConfig  # noqa: E402
from beamtree.demo import demo_corpus_text, demo_trainable_backend  # noqa: E402

LOCAL_PROBES = [
    "the cat sat on the mat",
    "democracy is the government",
    "the president leads the government",
    "a nation of immigrants",
]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="runs/adapt", type=Path)
    parser.add_argument("--steps", type=int, default=4, help="local fine-tune steps")
    parser.add_argument("--learning-rate", type=float, default=2.0)
    parser.add_argument("--split-ratio", type=float, default=0.75)
    parser.add_argument(
        "--schedule", default="0,2,5,10,16",
        help="comma-separated train-sample counts for the global curve",
    )
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    config = FineTuneConfig(learning_rate=args.learning_rate, steps=1)

    print(f"== local adaptation ({args.steps} steps, lr={args.learning_rate}) ==")
    for probe in LOCAL_PROBES:
        backend = demo_trainable_backend()
        tokens = backend.tokenize(probe)
        report = local_adaptation_report(
            backend, tokens, tokens[-1], args.steps, config
        )
        slug = "-".join(probe.split()[:3])
        path = args.out_dir / f"local-{slug}.json"
        path.write_text(report_to_json("local-adaptation", report.to_payload()))
        (path.with_suffix(".csv")).write_text(adaptation_to_csv(report))
        first, last = report.records[0], report.records[-1]
        print(
            f"  {probe!r:45s} target={report.target!r:10s} "
            f"p {first.target_prob:.6f} -> {last.target_prob:.6f}  "
            f"rank {first.target_rank} -> {last.target_rank}"
        )

    print("== global adaptation ==")
    samples = [ln for ln in demo_corpus_text().splitlines() if ln.strip()]
    schedule = [int(x) for x in args.schedule.split(",") if x != ""]
    backend = demo_trainable_backend()
    curve = global_adaptation_report(
        backend, samples, args.split_ratio, schedule, config
    )
    path = args.out_dir / "global-curve.json"
    path.write_text(report_to_json("global-adaptation", curve.to_payload()))
    path.with_suffix(".csv").write_text(curve_to_csv(curve))
    for point in curve.points:
        print(
            f"  n={point.train_samples:3d}  train_ppl={point.train_ppl:8.4f}  "
            f"test_ppl={point.test_ppl:8.4f}"
        )
    print(f"wrote reports to {args.out_dir}/")


if __name__ == "__main__":
    main()

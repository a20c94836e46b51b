#!/usr/bin/env python3
"""Run the low-shot protocol grid for one or more methods on a dataset
manifest and print a combined markdown report.

Usage:
    python3 scripts/run_low_shot_grid.py --manifest data/synthetic/manifest.txt \
        --methods zeroshot,svl-adapter-auto,linear-probe --out results/
"""

import argparse
import os

from blendshot.experiment import (
    DEFAULT_SEEDS,
    DEFAULT_SHOTS,
    METHODS,
    RunSpec,
    execute,
)
from blendshot.report import aggregate_runs, emit_report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--manifest", required=True)
    ap.add_argument("--methods", default="zeroshot,svl-adapter-auto",
                    help=f"comma-separated subset of {','.join(METHODS)}")
    ap.add_argument("--shots", default=",".join(map(str, DEFAULT_SHOTS)))
    ap.add_argument("--seeds", default=",".join(map(str, DEFAULT_SEEDS)))
    ap.add_argument("--epochs", type=int, default=50)
    ap.add_argument("--lambda-mode", default="auto",
                    help='"auto", "sweep", or a fixed float')
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    shots = tuple(int(s) for s in args.shots.split(","))
    seeds = tuple(int(s) for s in args.seeds.split(","))
    mode = args.lambda_mode
    if mode not in ("auto", "sweep"):
        mode = float(mode)

    all_results = []
    for method in args.methods.split(","):
        out_dir = os.path.join(args.out, method)
        spec = RunSpec(manifest=args.manifest, method=method, shots=shots,
                       seeds=seeds, epochs=args.epochs, lambda_mode=mode,
                       out_dir=out_dir)
        results, _ = execute(spec)
        all_results.extend(results)
        print(f"finished {method}: {len(results)} runs -> {out_dir}/")

    combined = aggregate_runs(all_results)
    report = emit_report(combined, "markdown")
    with open(os.path.join(args.out, "combined_report.md"), "w",
              encoding="utf-8") as f:
        f.write(report)
    print()
    print(report)


if __name__ == "__main__":
    main()

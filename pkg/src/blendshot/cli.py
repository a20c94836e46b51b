"""Command-line front end.

Subcommands: extract-check, zeroshot, adapt, lambda, pseudo, run, report.
Options may also come from a key=value config file (--config); explicit
flags win on conflict.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

from . import experiment
from .adapters import DEFAULT_HIDDEN_DIM
from .errors import BlendshotError
from .experiment import DEFAULT_SEEDS, DEFAULT_SHOTS, METHODS, RunSpec, write_text_atomic
from .fusion import sweep_csv, sweep_lambda
from .pseudolabel import DEFAULT_PSEUDOLABELS_PER_CLASS, pseudolabels_csv, select_pseudolabels
from .report import RunResult, aggregate_runs, emit_report, top1_accuracy
from .store import load_dataset, read_labels, read_matrix, sample_episode
from .zeroshot import (
    DEFAULT_TEMPERATURE,
    confidence_histogram,
    estimate_lambda,
    histogram_csv,
    zero_shot_probs,
)


def _int_list(text: str):
    return tuple(int(v) for v in text.split(",") if v != "")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--manifest", required=True, help="dataset manifest path")
    p.add_argument("--ssl-manifest", default=None,
                   help="optional manifest for the adapter's feature tables")
    p.add_argument("--shots", type=_int_list, default=DEFAULT_SHOTS,
                   help="comma-separated shots per class (default 1,2,4,8,16)")
    p.add_argument("--seeds", type=_int_list, default=DEFAULT_SEEDS,
                   help="comma-separated seeds (default 0,1,2)")
    p.add_argument("--temperature", type=float, default=DEFAULT_TEMPERATURE)
    p.add_argument("--lambda", dest="lambda_mode", default="auto",
                   help="auto | sweep | fixed value in [0,1]")
    p.add_argument("--k", type=int, default=DEFAULT_PSEUDOLABELS_PER_CLASS,
                   help="pseudolabels kept per predicted class")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--hidden", type=int, default=DEFAULT_HIDDEN_DIM)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--out", default=".", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blendshot",
        description="Zero- and low-shot classification over precomputed embeddings.",
    )
    parser.add_argument("--config", default=None,
                        help="key=value file supplying option defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract-check", help="validate embedding/label files")
    p.add_argument("paths", nargs="*", help="embedding or label files")
    p.add_argument("--manifest", default=None, help="validate a whole manifest")

    p = sub.add_parser("zeroshot", help="zero-shot evaluation on the test split")
    _add_common(p)
    p.add_argument("--histogram-bins", type=int, default=10)

    p = sub.add_parser("adapt", help="train and evaluate one method over the grid")
    _add_common(p)
    p.add_argument("--method", required=True, choices=METHODS)

    p = sub.add_parser("lambda", help="estimate or sweep the blending weight")
    p.add_argument("mode", choices=["estimate", "sweep"])
    _add_common(p)

    p = sub.add_parser("pseudo", help="export confident pseudolabels")
    _add_common(p)

    p = sub.add_parser("run", help="full experimental grid for one method")
    _add_common(p)
    p.add_argument("--method", required=True, choices=METHODS)

    p = sub.add_parser("report", help="aggregate a runs.csv into a report")
    p.add_argument("--runs", required=True, help="runs.csv produced by run/adapt")
    p.add_argument("--format", choices=["csv", "markdown"], default="csv")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv):
    """Load key=value defaults from --config; explicit flags still win."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    entries = {}
    with open(known.config, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line and not line.startswith("#") and "=" in line:
                k, v = line.split("=", 1)
                entries[k.strip().replace("-", "_")] = v.strip()
    coerced = {}
    for key, raw in entries.items():
        if key in ("shots", "seeds"):
            coerced[key] = _int_list(raw)
        elif key in ("temperature", "lr", "alpha", "beta"):
            coerced[key] = float(raw)
        elif key in ("k", "epochs", "batch", "hidden", "histogram_bins"):
            coerced[key] = int(raw)
        else:
            coerced[key] = raw
    for action in parser._subparsers._group_actions[0].choices.values():
        action.set_defaults(**{k: v for k, v in coerced.items()
                               if k in {a.dest for a in action._actions}})


def _spec_from_args(args, method: str) -> RunSpec:
    return RunSpec(
        manifest=args.manifest, method=method, shots=args.shots, seeds=args.seeds,
        temperature=args.temperature, lambda_mode=args.lambda_mode, k=args.k,
        epochs=args.epochs, batch_size=args.batch, lr=args.lr,
        hidden_dim=args.hidden, out_dir=args.out, ssl_manifest=args.ssl_manifest,
        alpha=args.alpha, beta=args.beta,
    )


def _cmd_extract_check(args) -> int:
    failures = 0
    for path in args.paths:
        try:
            try:
                matrix, _ = read_matrix(path)
                print(f"OK  {path}  matrix {matrix.shape[0]}x{matrix.shape[1]}")
            except BlendshotError:
                labels = read_labels(path)
                print(f"OK  {path}  labels n={labels.size}")
        except (BlendshotError, OSError) as e:
            print(f"FAIL  {path}  {e}")
            failures += 1
    if args.manifest:
        try:
            ds = load_dataset(args.manifest)
            print(f"OK  {args.manifest}  dataset={ds.name} "
                  f"train={ds.train.num_items} test={ds.test.num_items} "
                  f"classes={ds.classes.num_classes} dim={ds.train.dim}")
        except (BlendshotError, OSError) as e:
            print(f"FAIL  {args.manifest}  {e}")
            failures += 1
    return 1 if failures else 0


def _cmd_zeroshot(args) -> int:
    ds = load_dataset(args.manifest)
    pv = zero_shot_probs(ds.test, ds.classes, args.temperature)
    acc = top1_accuracy(pv, ds.test_labels.labels)
    lam = estimate_lambda(pv)
    os.makedirs(args.out, exist_ok=True)
    counts = confidence_histogram(pv, args.histogram_bins)
    write_text_atomic(os.path.join(args.out, "confidence_histogram.csv"),
                      histogram_csv(counts))
    results = [RunResult(dataset=ds.name, method="zeroshot", shots=0, seed=0,
                         top1=acc, lambda_used=lam.value)]
    write_text_atomic(os.path.join(args.out, "report.csv"),
                      emit_report(aggregate_runs(results), "csv"))
    print(f"zero-shot top1={acc:.6f}  auto-lambda={lam.value:.6f}")
    return 0


def _cmd_lambda(args) -> int:
    ds = load_dataset(args.manifest)
    pv = zero_shot_probs(ds.test, ds.classes, args.temperature)
    if args.mode == "estimate":
        lam = estimate_lambda(pv)
        print(f"lambda={lam.value:.6f} method={lam.method} n={lam.num_items}")
        return 0
    # sweep: train one adapter cell and sweep on the held-out validation split
    from .adapters import predict_svl_adapter, train_svl_adapter
    from .store import split_validation

    ssl_ds = load_dataset(args.ssl_manifest) if args.ssl_manifest else ds
    shots, seed = args.shots[0], args.seeds[0]
    episode = sample_episode(ds.train_labels, shots, seed,
                             num_classes=ds.classes.num_classes)
    idx = episode.all_indices()
    adapter, _ = train_svl_adapter(
        ssl_ds.train.features[idx], ds.train_labels.labels[idx],
        ds.classes.num_classes, cfg=_spec_from_args(args, "svl-adapter").train_config(seed),
        hidden_dim=args.hidden)
    val = split_validation(ds.train_labels, episode, shots, seed)
    vidx = val.all_indices()
    pv_val = experiment.zero_shot_probs_subset(ds, vidx, args.temperature)
    ps_val = predict_svl_adapter(adapter, ssl_ds.train.features[vidx])
    estimate, table = sweep_lambda(pv_val, ps_val, ds.train_labels.labels[vidx])
    os.makedirs(args.out, exist_ok=True)
    write_text_atomic(os.path.join(args.out, "lambda_sweep.csv"), sweep_csv(table))
    print(f"lambda={estimate.value:.6f} method={estimate.method} n={estimate.num_items}")
    return 0


def _cmd_pseudo(args) -> int:
    ds = load_dataset(args.manifest)
    pv = zero_shot_probs(ds.test, ds.classes, args.temperature)
    selection = select_pseudolabels(pv, k=args.k)
    os.makedirs(args.out, exist_ok=True)
    write_text_atomic(os.path.join(args.out, "pseudolabels.csv"),
                      pseudolabels_csv(selection, ids=ds.test.ids))
    print(f"selected {len(selection)} pseudolabels "
          f"({len(selection.empty_classes)} empty classes)")
    return 0


def _cmd_run(args) -> int:
    spec = _spec_from_args(args, args.method)
    results, aggregates = experiment.execute(spec)
    for a in aggregates:
        print(f"{a.dataset} {a.method} shots={a.shots} "
              f"mean_top1={a.mean_top1:.6f} std={a.std_top1:.6f} n={a.num_runs}")
    return 0


def _cmd_report(args) -> int:
    results = []
    with open(args.runs, encoding="utf-8", newline="") as f:
        for row in csv.DictReader(f):
            results.append(RunResult(
                dataset=row["dataset"], method=row["method"],
                shots=int(row["shots"]), seed=int(row["seed"]),
                top1=float(row["top1"]),
                lambda_used=float(row["lambda"]) if row.get("lambda") else None,
            ))
    doc = emit_report(aggregate_runs(results), args.format)
    if args.out:
        write_text_atomic(args.out, doc)
    else:
        sys.stdout.write(doc)
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    _apply_config_file(parser, argv)
    args = parser.parse_args(argv)
    try:
        if args.command == "extract-check":
            return _cmd_extract_check(args)
        if args.command == "zeroshot":
            return _cmd_zeroshot(args)
        if args.command in ("adapt", "run"):
            return _cmd_run(args)
        if args.command == "lambda":
            return _cmd_lambda(args)
        if args.command == "pseudo":
            return _cmd_pseudo(args)
        if args.command == "report":
            return _cmd_report(args)
    except (BlendshotError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

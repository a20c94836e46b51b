"""Top-1 accuracy, multi-seed aggregation, and deterministic report emission."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInputError, ShapeError
from .zeroshot import ProbabilityMatrix


@dataclass
class RunResult:
    dataset: str
    method: str
    shots: int  # 0 for zero-shot
    seed: int
    top1: float
    lambda_used: float | None = None


@dataclass
class AggregateResult:
    dataset: str
    method: str
    shots: int
    mean_top1: float
    std_top1: float  # population std: the seeds ARE the whole population
    num_runs: int
    lambda_mean: float | None = None


def top1_accuracy(probs, labels) -> float:
    """Fraction of rows whose argmax (lowest index on ties) equals the label."""
    p = probs.probs if isinstance(probs, ProbabilityMatrix) else np.asarray(probs)
    y = np.asarray(labels, dtype=np.int64)
    if p.shape[0] != y.shape[0]:
        raise ShapeError(f"{p.shape[0]} prediction rows for {y.shape[0]} labels")
    if y.size == 0:
        raise EmptyInputError("no items to score")
    return float((p.argmax(axis=1) == y).mean())


def aggregate_runs(results) -> list:
    """Group RunResults by (dataset, method, shots) and aggregate."""
    if not results:
        raise EmptyInputError("no run results to aggregate")
    groups = {}
    for r in results:
        groups.setdefault((r.dataset, r.method, r.shots), []).append(r)
    out = []
    for (dataset, method, shots) in sorted(groups):
        runs = groups[(dataset, method, shots)]
        accs = np.asarray([r.top1 for r in runs], dtype=np.float64)
        lams = [r.lambda_used for r in runs if r.lambda_used is not None]
        out.append(AggregateResult(
            dataset=dataset, method=method, shots=shots,
            mean_top1=float(accs.mean()), std_top1=float(accs.std()),
            num_runs=len(runs),
            lambda_mean=float(np.mean(lams)) if lams else None,
        ))
    return out


def _lambda_str(value: float | None) -> str:
    return "" if value is None else f"{value:.6f}"


def emit_report(aggregates, fmt: str = "csv") -> str:
    """Render aggregates as CSV or markdown; byte-deterministic."""
    rows = sorted(aggregates, key=lambda a: (a.dataset, a.method, a.shots))
    header = ["dataset", "method", "shots", "seed_count", "mean_top1", "std_top1", "lambda"]
    data = [
        [a.dataset, a.method, str(a.shots), str(a.num_runs),
         f"{a.mean_top1:.6f}", f"{a.std_top1:.6f}", _lambda_str(a.lambda_mean)]
        for a in rows
    ]
    if fmt == "csv":
        lines = [",".join(header)] + [",".join(r) for r in data]
        return "\n".join(lines) + "\n"
    if fmt == "markdown":
        lines = ["| " + " | ".join(header) + " |",
                 "|" + "|".join(["---"] * len(header)) + "|"]
        lines += ["| " + " | ".join(r) + " |" for r in data]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")


def run_results_csv(results) -> str:
    """Per-run rows, sorted for reproducible bytes."""
    rows = sorted(results, key=lambda r: (r.dataset, r.method, r.shots, r.seed))
    lines = ["dataset,method,shots,seed,top1,lambda"]
    for r in rows:
        lines.append(f"{r.dataset},{r.method},{r.shots},{r.seed},"
                     f"{r.top1:.6f},{_lambda_str(r.lambda_used)}")
    return "\n".join(lines) + "\n"

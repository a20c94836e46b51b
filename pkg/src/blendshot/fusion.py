"""Convex blending of zero-shot and adapter predictions, and the
validation-based sweep over blending weights."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInputError, InvalidInputError, ShapeError
from .zeroshot import LambdaEstimate, ProbabilityMatrix

LAMBDA_GRID_SIZE = 20


@dataclass
class FusionResult:
    probs: ProbabilityMatrix
    lam: LambdaEstimate
    components: tuple  # (source of the zero-shot input, source of the adapter input)


def _check_row_stochastic(pm: ProbabilityMatrix, name: str) -> None:
    p = pm.probs
    if p.size and (p.min() < 0 or not np.allclose(p.sum(axis=1), 1.0, atol=1e-4)):
        raise InvalidInputError(f"{name} is not row-stochastic")


def fuse_predictions(pv: ProbabilityMatrix, ps: ProbabilityMatrix,
                     lam, components: tuple | None = None) -> FusionResult:
    """Elementwise convex combination lam*pv + (1-lam)*ps."""
    if pv.probs.shape != ps.probs.shape:
        raise ShapeError(f"shape mismatch: {pv.probs.shape} vs {ps.probs.shape}")
    if isinstance(lam, LambdaEstimate):
        estimate = lam
    else:
        lam = float(lam)
        if not 0.0 <= lam <= 1.0:
            raise InvalidInputError(f"lambda {lam} outside [0, 1]")
        estimate = LambdaEstimate(value=lam, num_items=pv.num_items, method="fixed")
    _check_row_stochastic(pv, "zero-shot input")
    _check_row_stochastic(ps, "adapter input")
    value = estimate.value
    fused = value * pv.probs + (1.0 - value) * ps.probs
    pm = ProbabilityMatrix(probs=fused, source="fused",
                           temperature_used=pv.temperature_used)
    return FusionResult(probs=pm, lam=estimate,
                        components=components or (pv.source, ps.source))


def lambda_grid(num_points: int = LAMBDA_GRID_SIZE) -> np.ndarray:
    """Equally spaced grid on [0, 1] including both endpoints."""
    return np.linspace(0.0, 1.0, num_points)


def sweep_lambda(pv_val: ProbabilityMatrix, ps_val: ProbabilityMatrix,
                 val_labels, num_points: int = LAMBDA_GRID_SIZE):
    """Pick the grid value maximizing validation top-1.

    Ties break toward the smallest lambda (favoring the adapter). Returns
    (LambdaEstimate, [(lambda, accuracy), ...]).
    """
    from .report import top1_accuracy

    y = np.asarray(val_labels, dtype=np.int64)
    if y.size == 0:
        raise EmptyInputError("validation set is empty")
    table = []
    best_lam, best_acc = None, -1.0
    for lam in lambda_grid(num_points):
        fused = fuse_predictions(pv_val, ps_val, float(lam))
        acc = top1_accuracy(fused.probs, y)
        table.append((float(lam), acc))
        if acc > best_acc:
            best_lam, best_acc = float(lam), acc
    estimate = LambdaEstimate(value=best_lam, num_items=int(y.size),
                              method="validation-sweep")
    return estimate, table


def sweep_csv(table) -> str:
    lines = ["lambda,val_top1"]
    for lam, acc in table:
        lines.append(f"{lam:.6f},{acc:.6f}")
    return "\n".join(lines) + "\n"

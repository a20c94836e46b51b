"""Dense NN primitives: softmax, a bias-free two-layer MLP with analytic
gradients, the Adam optimizer, and a finite-difference gradient checker.

Matrices are plain numpy arrays (float32 on production paths, float64 in
verification mode).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, InvalidLabelError, ShapeError


def _check_finite(a: np.ndarray, name: str) -> None:
    if not np.isfinite(a).all():
        raise InvalidInputError(f"{name} contains non-finite entries")


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with per-row max subtraction for stability."""
    logits = np.asarray(logits)
    if logits.ndim != 2:
        raise ShapeError(f"expected a 2-d logits array, got ndim={logits.ndim}")
    _check_finite(logits, "logits")
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def l2_normalize_rows(x: np.ndarray, min_norm: float = 1e-12) -> np.ndarray:
    """L2-normalize each row; rows below min_norm raise downstream checks."""
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    return x / np.maximum(norms, min_norm)


@dataclass
class MlpParams:
    """Weights of the bias-free two-layer head: (D x H) and (H x K)."""

    w1: np.ndarray
    w2: np.ndarray

    def __post_init__(self):
        if self.w1.ndim != 2 or self.w2.ndim != 2:
            raise ShapeError("w1 and w2 must be 2-d")
        if self.w1.shape[1] != self.w2.shape[0]:
            raise ShapeError(
                f"hidden dims disagree: w1 is {self.w1.shape}, w2 is {self.w2.shape}"
            )

    @property
    def input_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def num_classes(self) -> int:
        return self.w2.shape[1]

    def copy(self) -> "MlpParams":
        return MlpParams(self.w1.copy(), self.w2.copy())

    def astype(self, dtype) -> "MlpParams":
        return MlpParams(self.w1.astype(dtype), self.w2.astype(dtype))


def init_mlp(
    input_dim: int,
    hidden_dim: int,
    num_classes: int,
    seed: int = 0,
    scheme: str = "uniform",
    dtype=np.float32,
) -> MlpParams:
    """Seeded init: uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) per layer, or zeros."""
    if scheme == "zero":
        return MlpParams(
            np.zeros((input_dim, hidden_dim), dtype=dtype),
            np.zeros((hidden_dim, num_classes), dtype=dtype),
        )
    if scheme != "uniform":
        raise InvalidInputError(f"unknown init scheme {scheme!r}")
    rng = np.random.default_rng(seed)
    b1 = 1.0 / np.sqrt(input_dim)
    b2 = 1.0 / np.sqrt(hidden_dim)
    w1 = rng.uniform(-b1, b1, size=(input_dim, hidden_dim)).astype(dtype)
    w2 = rng.uniform(-b2, b2, size=(hidden_dim, num_classes)).astype(dtype)
    return MlpParams(w1, w2)


def mlp_forward(params: MlpParams, inputs: np.ndarray, activation: str = "relu"):
    """Forward pass: logits = act(inputs @ w1) @ w2.

    Returns (logits, cache) where cache holds the pre- and post-activation
    hidden values for backprop. activation="identity" is a test hook.
    """
    inputs = np.asarray(inputs)
    if inputs.ndim != 2:
        raise ShapeError("inputs must be 2-d")
    if inputs.shape[1] != params.input_dim:
        raise ShapeError(
            f"inputs have {inputs.shape[1]} features, adapter expects {params.input_dim}"
        )
    pre = inputs @ params.w1
    if activation == "relu":
        post = relu(pre)
    elif activation == "identity":
        post = pre
    else:
        raise InvalidInputError(f"unknown activation {activation!r}")
    logits = post @ params.w2
    cache = {"inputs": inputs, "pre": pre, "post": post}
    return logits, cache


def ce_loss_and_grads(params: MlpParams, inputs: np.ndarray, labels: np.ndarray):
    """Mean cross-entropy over the batch and exact analytic gradients.

    Returns (loss, grads) with grads shaped like params.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise InvalidInputError("batch is empty")
    k = params.num_classes
    if labels.min() < 0 or labels.max() >= k:
        bad = int(labels[(labels < 0) | (labels >= k)][0])
        raise InvalidLabelError(f"label {bad} outside [0, {k})")

    logits, cache = mlp_forward(params, inputs)
    probs = softmax(logits)
    n = inputs.shape[0]
    picked = probs[np.arange(n), labels]
    loss = float(-np.log(np.maximum(picked, 1e-300)).mean())

    dlogits = probs.copy()
    dlogits[np.arange(n), labels] -= 1.0
    dlogits /= n
    gw2 = cache["post"].T @ dlogits
    dpost = dlogits @ params.w2.T
    dpre = dpost * (cache["pre"] > 0)
    gw1 = cache["inputs"].T @ dpre
    return loss, MlpParams(gw1, gw2)


@dataclass
class AdamState:
    """Adam moments for a flat list of parameter arrays."""

    m: list = field(default_factory=list)
    v: list = field(default_factory=list)
    step_count: int = 0
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


def adam_init(param_arrays, lr: float = 0.001, beta1: float = 0.9,
              beta2: float = 0.999, epsilon: float = 1e-8) -> AdamState:
    return AdamState(
        m=[np.zeros_like(p) for p in param_arrays],
        v=[np.zeros_like(p) for p in param_arrays],
        step_count=0,
        lr=lr,
        beta1=beta1,
        beta2=beta2,
        epsilon=epsilon,
    )


def adam_step(state: AdamState, param_arrays, grad_arrays) -> None:
    """One Adam update with bias correction; params updated in place."""
    if len(param_arrays) != len(state.m) or len(grad_arrays) != len(state.m):
        raise ShapeError("parameter/gradient count does not match Adam state")
    state.step_count += 1
    t = state.step_count
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    for p, g, m, v in zip(param_arrays, grad_arrays, state.m, state.v):
        if p.shape != g.shape:
            raise ShapeError(f"grad shape {g.shape} != param shape {p.shape}")
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * np.square(g)
        m_hat = m / bc1
        v_hat = v / bc2
        p -= (state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)).astype(p.dtype)


@dataclass
class GradCheckReport:
    rel_error_w1: float
    rel_error_w2: float
    tol: float

    @property
    def max_rel_error(self) -> float:
        return max(self.rel_error_w1, self.rel_error_w2)

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tol


def grad_check(params: MlpParams, inputs: np.ndarray, labels: np.ndarray,
               h: float = 1e-5, tol: float = 1e-4) -> GradCheckReport:
    """Compare analytic gradients to central finite differences (64-bit)."""
    params64 = params.astype(np.float64)
    inputs64 = np.asarray(inputs, dtype=np.float64)
    _, analytic = ce_loss_and_grads(params64, inputs64, labels)

    def numeric_grad(which: str) -> np.ndarray:
        w = getattr(params64, which)
        g = np.zeros_like(w)
        it = np.nditer(w, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = w[idx]
            w[idx] = orig + h
            lp, _ = ce_loss_and_grads(params64, inputs64, labels)
            w[idx] = orig - h
            lm, _ = ce_loss_and_grads(params64, inputs64, labels)
            w[idx] = orig
            g[idx] = (lp - lm) / (2.0 * h)
        return g

    def rel(a: np.ndarray, n: np.ndarray) -> float:
        denom = np.linalg.norm(a) + np.linalg.norm(n)
        if denom == 0.0:
            return 0.0
        return float(np.linalg.norm(a - n) / denom)

    return GradCheckReport(
        rel_error_w1=rel(analytic.w1, numeric_grad("w1")),
        rel_error_w2=rel(analytic.w2, numeric_grad("w2")),
        tol=tol,
    )

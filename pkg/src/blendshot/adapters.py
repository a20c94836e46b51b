"""Trainable heads over frozen embeddings: the two-layer fusion adapter,
a residual feature-adapter baseline, and a linear probe."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass

import numpy as np

from .errors import InvalidLabelError, ShapeError
from .numerics import (
    MlpParams,
    adam_init,
    adam_step,
    ce_loss_and_grads,
    init_mlp,
    l2_normalize_rows,
    mlp_forward,
    relu,
    softmax,
)
from .store import ClassSpace, EmbeddingTable, read_matrix, write_matrix
from .zeroshot import DEFAULT_TEMPERATURE, ProbabilityMatrix, cosine_probs

logger = logging.getLogger(__name__)

DEFAULT_HIDDEN_DIM = 256
DEFAULT_BOTTLENECK_RATIO = 4


@dataclass
class TrainConfig:
    epochs: int = 50
    batch_size: int = 32
    lr: float = 0.001
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass
class AdapterParams:
    """Trained two-layer head plus the metadata needed to reuse it."""

    mlp: MlpParams
    hidden_dim: int = DEFAULT_HIDDEN_DIM
    input_encoder_id: str = ""
    normalize_inputs: bool = True
    seed: int = 0

    @property
    def num_classes(self) -> int:
        return self.mlp.num_classes


@dataclass
class LinearProbeParams:
    """Single D x K softmax-regression layer over frozen features."""

    w: np.ndarray
    normalize_inputs: bool = True
    input_encoder_id: str = ""

    @property
    def num_classes(self) -> int:
        return self.w.shape[1]


@dataclass
class ClipAdapterParams:
    """Residual bottleneck adapters over visual (and optionally text) features."""

    wv1: np.ndarray
    wv2: np.ndarray
    wt1: np.ndarray
    wt2: np.ndarray
    alpha: float = 0.5
    beta: float = 0.5
    visual_only: bool = True
    temperature: float = DEFAULT_TEMPERATURE

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0 and 0.0 <= self.beta <= 1.0):
            raise ValueError("alpha and beta must lie in [0, 1]")


def _features_of(table) -> np.ndarray:
    return table.features if isinstance(table, EmbeddingTable) else np.asarray(table)


def _prep_inputs(features: np.ndarray, normalize: bool) -> np.ndarray:
    x = np.asarray(features, dtype=np.float32)
    return l2_normalize_rows(x).astype(np.float32) if normalize else x


def _check_labels(labels: np.ndarray, num_classes: int) -> None:
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise InvalidLabelError(
            f"labels span [{labels.min()}, {labels.max()}], expected [0, {num_classes})"
        )
    present = set(np.unique(labels).tolist())
    absent = [c for c in range(num_classes) if c not in present]
    if absent:
        logger.warning("classes %s absent from the training episode", absent)


def _minibatches(n: int, cfg: TrainConfig, rng: np.random.Generator):
    order = rng.permutation(n) if cfg.shuffle else np.arange(n)
    for start in range(0, n, cfg.batch_size):
        yield order[start:start + cfg.batch_size]  # last partial batch kept


# ---------------------------------------------------------------------------
# fusion adapter (two-layer MLP head)


def train_svl_adapter(train, labels, num_classes: int, cfg: TrainConfig | None = None,
                      hidden_dim: int = DEFAULT_HIDDEN_DIM,
                      normalize_inputs: bool = True,
                      init: str = "uniform"):
    """Minibatch Adam on softmax cross-entropy; deterministic under cfg.seed.

    Returns (AdapterParams, per-epoch mean loss trace).
    """
    cfg = cfg or TrainConfig()
    x = _prep_inputs(_features_of(train), normalize_inputs)
    y = np.asarray(labels, dtype=np.int64)
    if x.shape[0] != y.shape[0]:
        raise ShapeError(f"{x.shape[0]} feature rows for {y.shape[0]} labels")
    if y.size == 0:
        raise ShapeError("training episode is empty")
    _check_labels(y, num_classes)

    params = init_mlp(x.shape[1], hidden_dim, num_classes, seed=cfg.seed,
                      scheme=init, dtype=np.float32)
    state = adam_init([params.w1, params.w2], lr=cfg.lr)
    rng = np.random.default_rng([cfg.seed, 0xE90C])  # shuffle stream, separate from init
    trace = []
    n = x.shape[0]
    for _ in range(cfg.epochs):
        epoch_loss = 0.0
        for idx in _minibatches(n, cfg, rng):
            loss, grads = ce_loss_and_grads(params, x[idx], y[idx])
            adam_step(state, [params.w1, params.w2], [grads.w1, grads.w2])
            epoch_loss += loss * idx.size
        trace.append(epoch_loss / n)
    encoder_id = train.encoder_id if isinstance(train, EmbeddingTable) else ""
    adapter = AdapterParams(mlp=params, hidden_dim=hidden_dim,
                            input_encoder_id=encoder_id,
                            normalize_inputs=normalize_inputs, seed=cfg.seed)
    return adapter, trace


def predict_svl_adapter(params: AdapterParams, items) -> ProbabilityMatrix:
    """softmax of the adapter logits; no temperature on this path."""
    x = _prep_inputs(_features_of(items), params.normalize_inputs)
    logits, _ = mlp_forward(params.mlp, x)
    return ProbabilityMatrix(probs=softmax(logits.astype(np.float64)),
                             source="adapter", temperature_used=1.0)


# ---------------------------------------------------------------------------
# linear probe


def train_linear_probe(train, labels, num_classes: int,
                       cfg: TrainConfig | None = None,
                       normalize_inputs: bool = True):
    """Multinomial logistic regression (zero-initialized) trained with Adam."""
    cfg = cfg or TrainConfig()
    x = _prep_inputs(_features_of(train), normalize_inputs)
    y = np.asarray(labels, dtype=np.int64)
    if x.shape[0] != y.shape[0]:
        raise ShapeError(f"{x.shape[0]} feature rows for {y.shape[0]} labels")
    _check_labels(y, num_classes)

    w = np.zeros((x.shape[1], num_classes), dtype=np.float32)
    state = adam_init([w], lr=cfg.lr)
    rng = np.random.default_rng([cfg.seed, 0xE90C])
    trace = []
    n = x.shape[0]
    for _ in range(cfg.epochs):
        epoch_loss = 0.0
        for idx in _minibatches(n, cfg, rng):
            xb, yb = x[idx], y[idx]
            probs = softmax(xb @ w)
            picked = probs[np.arange(xb.shape[0]), yb]
            loss = float(-np.log(np.maximum(picked, 1e-300)).mean())
            dlogits = probs.copy()
            dlogits[np.arange(xb.shape[0]), yb] -= 1.0
            dlogits /= xb.shape[0]
            gw = (xb.T @ dlogits).astype(np.float32)
            adam_step(state, [w], [gw])
            epoch_loss += loss * idx.size
        trace.append(epoch_loss / n)
    encoder_id = train.encoder_id if isinstance(train, EmbeddingTable) else ""
    probe = LinearProbeParams(w=w, normalize_inputs=normalize_inputs,
                              input_encoder_id=encoder_id)
    return probe, trace


def predict_linear_probe(params: LinearProbeParams, items) -> ProbabilityMatrix:
    x = _prep_inputs(_features_of(items), params.normalize_inputs)
    return ProbabilityMatrix(probs=softmax((x @ params.w).astype(np.float64)),
                             source="adapter", temperature_used=1.0)


# ---------------------------------------------------------------------------
# residual feature adapter (CLIP-Adapter style)


def init_clip_adapter(dim: int, alpha: float = 0.5, beta: float = 0.5,
                      visual_only: bool = True,
                      ratio: int = DEFAULT_BOTTLENECK_RATIO,
                      temperature: float = DEFAULT_TEMPERATURE,
                      seed: int = 0) -> ClipAdapterParams:
    bottleneck = max(1, dim // ratio)
    rng = np.random.default_rng([seed, 0xC11F])
    b1 = 1.0 / np.sqrt(dim)
    b2 = 1.0 / np.sqrt(bottleneck)

    def layer(shape, bound):
        return rng.uniform(-bound, bound, size=shape).astype(np.float32)

    return ClipAdapterParams(
        wv1=layer((dim, bottleneck), b1), wv2=layer((bottleneck, dim), b2),
        wt1=layer((dim, bottleneck), b1), wt2=layer((bottleneck, dim), b2),
        alpha=alpha, beta=beta, visual_only=visual_only, temperature=temperature,
    )


def _residual_adapt(x: np.ndarray, w1: np.ndarray, w2: np.ndarray,
                    mix: float) -> np.ndarray:
    """mix * (ReLU(x@w1)@w2) + (1-mix) * x"""
    return mix * (relu(x @ w1) @ w2) + (1.0 - mix) * x


def clip_adapter_features(params: ClipAdapterParams, features: np.ndarray,
                          class_embeddings: np.ndarray):
    """Adapted feature and classifier matrices (f*, W*)."""
    f = np.asarray(features)
    w = np.asarray(class_embeddings)
    fstar = _residual_adapt(f, params.wv1, params.wv2, params.alpha)
    beta = 0.0 if params.visual_only else params.beta
    wstar = w if beta == 0.0 else _residual_adapt(w, params.wt1, params.wt2, beta)
    return fstar, wstar


def predict_clip_adapter(params: ClipAdapterParams, items,
                         classes: ClassSpace) -> ProbabilityMatrix:
    """softmax(temperature * cosine(f*, W*)); alpha=beta=0 reproduces the
    zero-shot path exactly."""
    fstar, wstar = clip_adapter_features(params, _features_of(items),
                                         classes.text_embeddings)
    probs = cosine_probs(fstar, wstar, params.temperature)
    return ProbabilityMatrix(probs=probs, source="adapter",
                             temperature_used=params.temperature)


def clip_adapter_loss_and_grads(params: ClipAdapterParams, features: np.ndarray,
                                class_embeddings: np.ndarray, labels: np.ndarray):
    """Cross-entropy on softmax(temp * cosine(f*, W*)) with analytic gradients
    for the adapter weights. Returns (loss, grads dict)."""
    f = np.asarray(features, dtype=np.float64)
    w = np.asarray(class_embeddings, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    n = f.shape[0]
    temp = params.temperature
    alpha = params.alpha
    beta = 0.0 if params.visual_only else params.beta

    wv1 = params.wv1.astype(np.float64)
    wv2 = params.wv2.astype(np.float64)
    wt1 = params.wt1.astype(np.float64)
    wt2 = params.wt2.astype(np.float64)

    zv = f @ wv1
    hv = relu(zv)
    fstar = alpha * (hv @ wv2) + (1.0 - alpha) * f
    if beta > 0.0:
        zt = w @ wt1
        ht = relu(zt)
        wstar = beta * (ht @ wt2) + (1.0 - beta) * w
    else:
        wstar = w

    fn = np.linalg.norm(fstar, axis=1, keepdims=True)
    wn = np.linalg.norm(wstar, axis=1, keepdims=True)
    u = fstar / fn
    v = wstar / wn
    logits = temp * (u @ v.T)
    probs = softmax(logits)
    picked = probs[np.arange(n), y]
    loss = float(-np.log(np.maximum(picked, 1e-300)).mean())

    dlogits = probs.copy()
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n
    du = temp * (dlogits @ v)
    dv = temp * (dlogits.T @ u)

    def through_norm(dunit, unit, norms):
        # d/dx of x/||x|| applied to the upstream gradient
        return (dunit - unit * (unit * dunit).sum(axis=1, keepdims=True)) / norms

    dfstar = through_norm(du, u, fn)
    da = alpha * dfstar
    gwv2 = hv.T @ da
    dhv = da @ wv2.T
    dzv = dhv * (zv > 0)
    gwv1 = f.T @ dzv

    grads = {"wv1": gwv1, "wv2": gwv2,
             "wt1": np.zeros_like(wt1), "wt2": np.zeros_like(wt2)}
    if beta > 0.0:
        dwstar = through_norm(dv, v, wn)
        dat = beta * dwstar
        grads["wt2"] = ht.T @ dat
        dht = dat @ wt2.T
        dzt = dht * (zt > 0)
        grads["wt1"] = w.T @ dzt
    return loss, grads


def train_clip_adapter(train, labels, classes: ClassSpace,
                       alpha: float = 0.5, beta: float = 0.5,
                       visual_only: bool = True,
                       cfg: TrainConfig | None = None,
                       ratio: int = DEFAULT_BOTTLENECK_RATIO,
                       temperature: float = DEFAULT_TEMPERATURE):
    """Train the residual adapters with fixed alpha/beta. Returns
    (ClipAdapterParams, loss trace)."""
    if classes.text_embeddings is None:
        raise ShapeError("class space has no text embeddings")
    cfg = cfg or TrainConfig()
    f = np.asarray(_features_of(train), dtype=np.float32)
    y = np.asarray(labels, dtype=np.int64)
    if f.shape[0] != y.shape[0]:
        raise ShapeError(f"{f.shape[0]} feature rows for {y.shape[0]} labels")
    _check_labels(y, classes.num_classes)
    w = np.asarray(classes.text_embeddings, dtype=np.float32)

    params = init_clip_adapter(f.shape[1], alpha=alpha, beta=beta,
                               visual_only=visual_only, ratio=ratio,
                               temperature=temperature, seed=cfg.seed)
    trainable = ["wv1", "wv2"] if visual_only else ["wv1", "wv2", "wt1", "wt2"]
    arrays = [getattr(params, name) for name in trainable]
    state = adam_init(arrays, lr=cfg.lr)
    rng = np.random.default_rng([cfg.seed, 0xE90C])
    trace = []
    n = f.shape[0]
    for _ in range(cfg.epochs):
        epoch_loss = 0.0
        for idx in _minibatches(n, cfg, rng):
            loss, grads = clip_adapter_loss_and_grads(params, f[idx], w, y[idx])
            adam_step(state, arrays, [grads[name].astype(np.float32) for name in trainable])
            epoch_loss += loss * idx.size
        trace.append(epoch_loss / n)
    return params, trace


# ---------------------------------------------------------------------------
# adapter serialization


def save_adapter(params: AdapterParams, directory, prefix: str = "adapter") -> None:
    os.makedirs(directory, exist_ok=True)
    write_matrix(os.path.join(directory, f"{prefix}_w1.emb"), params.mlp.w1)
    write_matrix(os.path.join(directory, f"{prefix}_w2.emb"), params.mlp.w2)
    meta = os.path.join(directory, f"{prefix}.manifest")
    tmp = f"{meta}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(f"hidden_dim={params.hidden_dim}\n")
        fh.write(f"num_classes={params.num_classes}\n")
        fh.write(f"encoder_id={params.input_encoder_id}\n")
        fh.write(f"normalize_inputs={str(params.normalize_inputs).lower()}\n")
        fh.write(f"seed={params.seed}\n")
    os.replace(tmp, meta)


def load_adapter(directory, prefix: str = "adapter") -> AdapterParams:
    w1, _ = read_matrix(os.path.join(directory, f"{prefix}_w1.emb"))
    w2, _ = read_matrix(os.path.join(directory, f"{prefix}_w2.emb"))
    entries = {}
    with open(os.path.join(directory, f"{prefix}.manifest"), encoding="utf-8") as fh:
        for line in fh:
            if "=" in line:
                k, v = line.strip().split("=", 1)
                entries[k] = v
    return AdapterParams(
        mlp=MlpParams(w1, w2),
        hidden_dim=int(entries.get("hidden_dim", w1.shape[1])),
        input_encoder_id=entries.get("encoder_id", ""),
        normalize_inputs=entries.get("normalize_inputs", "true") == "true",
        seed=int(entries.get("seed", 0)),
    )

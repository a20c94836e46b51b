"""End-to-end experiment protocol: manifest in, run rows and report out.

Evaluation always happens on the full test split; episodes and validation
splits only ever index the training pool.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .adapters import (
    DEFAULT_HIDDEN_DIM,
    TrainConfig,
    predict_clip_adapter,
    predict_linear_probe,
    predict_svl_adapter,
    train_clip_adapter,
    train_linear_probe,
    train_svl_adapter,
)
from .errors import BlendshotError
from .fusion import fuse_predictions, sweep_lambda
from .pseudolabel import DEFAULT_PSEUDOLABELS_PER_CLASS, zero_shot_adapt
from .report import RunResult, aggregate_runs, emit_report, run_results_csv
from .store import Dataset, load_dataset, sample_episode, split_validation
from .zeroshot import DEFAULT_TEMPERATURE, estimate_lambda, zero_shot_probs

METHODS = (
    "zeroshot",
    "linear-probe",
    "clip-adapter",
    "svl-adapter",
    "svl-adapter-auto",
    "zero-shot-svl",
)

DEFAULT_SHOTS = (1, 2, 4, 8, 16)
DEFAULT_SEEDS = (0, 1, 2)  # three runs, averaged


@dataclass
class RunSpec:
    manifest: str
    method: str
    shots: tuple = DEFAULT_SHOTS
    seeds: tuple = DEFAULT_SEEDS
    temperature: float = DEFAULT_TEMPERATURE
    lambda_mode: str | float = "auto"  # "auto" | "sweep" | fixed float
    k: int = DEFAULT_PSEUDOLABELS_PER_CLASS
    epochs: int = 50
    batch_size: int = 32
    lr: float = 0.001
    hidden_dim: int = DEFAULT_HIDDEN_DIM
    out_dir: str = "."
    ssl_manifest: str | None = None  # separate manifest for the adapter features
    alpha: float = 0.5
    beta: float = 0.5
    visual_only: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}, expected one of {METHODS}")
        if not self.seeds:
            raise ValueError("at least one seed is required")

    def train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(epochs=self.epochs, batch_size=self.batch_size,
                           lr=self.lr, seed=seed)


def write_text_atomic(path, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    os.replace(tmp, path)


def _episode_data(ds: Dataset, shots: int, seed: int):
    episode = sample_episode(ds.train_labels, shots, seed,
                             num_classes=ds.classes.num_classes)
    idx = episode.all_indices()
    return episode, idx, ds.train_labels.labels[idx]


def _lambda_for(spec: RunSpec, pv_test, ds: Dataset, ssl_ds: Dataset,
                episode, adapter, shots: int, seed: int):
    """Resolve the blending weight for one (shot, seed) cell."""
    mode = spec.lambda_mode
    if mode == "auto":
        return estimate_lambda(pv_test)
    if mode == "sweep":
        val = split_validation(ds.train_labels, episode, shots, seed)
        vidx = val.all_indices()
        if vidx.size == 0:
            raise BlendshotError("validation split is empty; cannot sweep lambda")
        pv_val = zero_shot_probs_subset(ds, vidx, spec.temperature)
        ps_val = predict_svl_adapter(adapter, ssl_ds.train.features[vidx])
        estimate, _ = sweep_lambda(pv_val, ps_val, ds.train_labels.labels[vidx])
        return estimate
    return float(mode)


def zero_shot_probs_subset(ds: Dataset, indices, temperature: float):
    from .store import EmbeddingTable

    table = EmbeddingTable(
        ids=[ds.train.ids[int(i)] for i in indices],
        features=ds.train.features[indices],
        encoder_id=ds.train.encoder_id,
    )
    return zero_shot_probs(table, ds.classes, temperature)


def execute(spec: RunSpec):
    """Run the full grid for one method. Returns (results, aggregates)."""
    ds = load_dataset(spec.manifest)
    ssl_ds = load_dataset(spec.ssl_manifest) if spec.ssl_manifest else ds
    if ssl_ds.train.num_items != ds.train.num_items or \
            ssl_ds.test.num_items != ds.test.num_items:
        raise BlendshotError("ssl manifest items are not aligned with the main manifest")

    results = []
    k_classes = ds.classes.num_classes
    test_labels = ds.test_labels.labels

    if spec.method == "zeroshot":
        pv = zero_shot_probs(ds.test, ds.classes, spec.temperature)
        from .report import top1_accuracy

        results.append(RunResult(dataset=ds.name, method=spec.method, shots=0,
                                 seed=0, top1=top1_accuracy(pv, test_labels)))
    elif spec.method == "zero-shot-svl":
        from .report import top1_accuracy

        pv = zero_shot_probs(ds.test, ds.classes, spec.temperature)
        for seed in spec.seeds:
            fused = zero_shot_adapt(ssl_ds.test, pv, k=spec.k,
                                    cfg=spec.train_config(seed),
                                    hidden_dim=spec.hidden_dim)
            results.append(RunResult(
                dataset=ds.name, method=spec.method, shots=0, seed=seed,
                top1=top1_accuracy(fused.probs, test_labels),
                lambda_used=fused.lam.value))
    else:
        from .report import top1_accuracy

        for shots in spec.shots:
            for seed in spec.seeds:
                episode, idx, ep_labels = _episode_data(ds, shots, seed)
                cfg = spec.train_config(seed)
                lambda_used = None
                if spec.method == "linear-probe":
                    probe, _ = train_linear_probe(ds.train.features[idx], ep_labels,
                                                  k_classes, cfg)
                    probs = predict_linear_probe(probe, ds.test)
                elif spec.method == "clip-adapter":
                    params, _ = train_clip_adapter(
                        ds.train.features[idx], ep_labels, ds.classes,
                        alpha=spec.alpha, beta=spec.beta,
                        visual_only=spec.visual_only, cfg=cfg,
                        temperature=spec.temperature)
                    probs = predict_clip_adapter(params, ds.test, ds.classes)
                else:  # svl-adapter / svl-adapter-auto
                    adapter, _ = train_svl_adapter(
                        ssl_ds.train.features[idx], ep_labels, k_classes,
                        cfg=cfg, hidden_dim=spec.hidden_dim)
                    ps = predict_svl_adapter(adapter, ssl_ds.test)
                    pv = zero_shot_probs(ds.test, ds.classes, spec.temperature)
                    if spec.method == "svl-adapter-auto":
                        lam = estimate_lambda(pv)
                    else:
                        lam = _lambda_for(spec, pv, ds, ssl_ds, episode, adapter,
                                          shots, seed)
                    fused = fuse_predictions(pv, ps, lam)
                    probs = fused.probs
                    lambda_used = fused.lam.value
                results.append(RunResult(
                    dataset=ds.name, method=spec.method, shots=shots, seed=seed,
                    top1=top1_accuracy(probs, test_labels),
                    lambda_used=lambda_used))

    aggregates = aggregate_runs(results)
    os.makedirs(spec.out_dir, exist_ok=True)
    write_text_atomic(os.path.join(spec.out_dir, "runs.csv"),
                      run_results_csv(results))
    write_text_atomic(os.path.join(spec.out_dir, "report.csv"),
                      emit_report(aggregates, "csv"))
    return results, aggregates

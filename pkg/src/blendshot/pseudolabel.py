"""Zero-shot adaptation from confident pseudolabels: keep the top-k most
confident zero-shot predictions per predicted class and train the adapter
head on them. No ground-truth labels enter this module."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .adapters import DEFAULT_HIDDEN_DIM, TrainConfig, predict_svl_adapter, train_svl_adapter
from .errors import CannotAdaptError
from .fusion import FusionResult, fuse_predictions
from .zeroshot import ProbabilityMatrix, estimate_lambda

logger = logging.getLogger(__name__)

DEFAULT_PSEUDOLABELS_PER_CLASS = 16


@dataclass
class PseudoLabelSet:
    """Selected items grouped by predicted class, most confident first."""

    indices: np.ndarray
    pseudo_labels: np.ndarray
    confidences: np.ndarray
    k: int
    empty_classes: list = field(default_factory=list)

    def __len__(self) -> int:
        return int(self.indices.size)


def select_pseudolabels(probs: ProbabilityMatrix, k: int = DEFAULT_PSEUDOLABELS_PER_CLASS) -> PseudoLabelSet:
    """Per predicted class, keep the k items with the highest max probability.

    Ties break toward the lower item index. Classes with no predicted items
    are reported in empty_classes, not treated as errors.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    argmax = probs.argmax()
    conf = probs.row_maxima()
    indices, labels, confidences, empty = [], [], [], []
    for c in range(probs.num_classes):
        members = np.nonzero(argmax == c)[0]
        if members.size == 0:
            empty.append(c)
            continue
        # stable sort on descending confidence keeps ascending-index tie-break
        order = members[np.argsort(-conf[members], kind="stable")][:k]
        indices.extend(int(i) for i in order)
        labels.extend([c] * order.size)
        confidences.extend(float(conf[i]) for i in order)
    if empty:
        logger.warning("no confident predictions for classes %s", empty)
    return PseudoLabelSet(
        indices=np.asarray(indices, dtype=np.int64),
        pseudo_labels=np.asarray(labels, dtype=np.int64),
        confidences=np.asarray(confidences, dtype=np.float64),
        k=k,
        empty_classes=empty,
    )


def pseudolabels_csv(selection: PseudoLabelSet, ids=None) -> str:
    lines = ["item_id,pseudo_label,confidence"]
    for idx, lab, conf in zip(selection.indices, selection.pseudo_labels,
                              selection.confidences):
        item_id = ids[idx] if ids is not None else str(int(idx))
        lines.append(f"{item_id},{int(lab)},{conf:.6f}")
    return "\n".join(lines) + "\n"


def zero_shot_adapt(items, clip_probs: ProbabilityMatrix,
                    k: int = DEFAULT_PSEUDOLABELS_PER_CLASS,
                    cfg: TrainConfig | None = None,
                    hidden_dim: int = DEFAULT_HIDDEN_DIM) -> FusionResult:
    """Full pseudolabel pipeline: select -> train adapter -> predict -> fuse
    with the zero-shot predictions using the auto-confidence blending weight.

    `items` supplies the features the adapter trains on (self-supervised
    encoder outputs); `clip_probs` are zero-shot predictions aligned by index.
    """
    selection = select_pseudolabels(clip_probs, k=k)
    if len(selection) == 0:
        raise CannotAdaptError("no pseudolabels selected for any class")
    features = items.features if hasattr(items, "features") else np.asarray(items)
    adapter, _ = train_svl_adapter(
        features[selection.indices], selection.pseudo_labels,
        num_classes=clip_probs.num_classes, cfg=cfg, hidden_dim=hidden_dim,
    )
    adapter_probs = predict_svl_adapter(adapter, features)
    lam = estimate_lambda(clip_probs)
    return fuse_predictions(clip_probs, adapter_probs, lam)

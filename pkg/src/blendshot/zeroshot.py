"""Zero-shot classification from image/class-text embeddings, confidence
statistics, and automatic blending-weight estimation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEmbeddingError, EmptyInputError, ManifestError, ShapeError
from .numerics import softmax
from .store import ClassSpace, EmbeddingTable

DEFAULT_TEMPERATURE = 100.0


@dataclass
class ProbabilityMatrix:
    """N x K row-stochastic predictions with provenance."""

    probs: np.ndarray
    source: str = "external"  # zero-shot | adapter | fused | external
    temperature_used: float = 1.0

    @property
    def num_items(self) -> int:
        return self.probs.shape[0]

    @property
    def num_classes(self) -> int:
        return self.probs.shape[1]

    def row_maxima(self) -> np.ndarray:
        return self.probs.max(axis=1)

    def argmax(self) -> np.ndarray:
        # ties broken toward the lowest class index
        return self.probs.argmax(axis=1)


@dataclass
class LambdaEstimate:
    value: float
    num_items: int
    method: str  # auto-confidence | validation-sweep | fixed

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"lambda {self.value} outside [0, 1]")


def _normalized_rows(x: np.ndarray, what: str) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    if x.shape[0] and norms.min() <= 0.0:
        row = int(np.argmin(norms))
        raise DegenerateEmbeddingError(f"{what} row {row} has zero norm")
    return x / norms


def cosine_probs(features: np.ndarray, class_embeddings: np.ndarray,
                 temperature: float) -> np.ndarray:
    """softmax(temperature * cosine similarity); shared by the zero-shot and
    CLIP-adapter prediction paths so their endpoint cases agree bitwise."""
    u = _normalized_rows(np.asarray(features, dtype=np.float64), "image embedding")
    v = _normalized_rows(np.asarray(class_embeddings, dtype=np.float64), "class embedding")
    return softmax(temperature * (u @ v.T))


def zero_shot_probs(images: EmbeddingTable, classes: ClassSpace,
                    temperature: float = DEFAULT_TEMPERATURE) -> ProbabilityMatrix:
    """Classify each item by temperature-scaled cosine similarity to the
    class-name text embeddings."""
    if classes.text_embeddings is None:
        raise ManifestError("class space has no text embeddings")
    if images.dim != classes.text_embeddings.shape[1]:
        raise ShapeError(
            f"image dim {images.dim} != text embedding dim "
            f"{classes.text_embeddings.shape[1]}"
        )
    probs = cosine_probs(images.features, classes.text_embeddings, temperature)
    return ProbabilityMatrix(probs=probs, source="zero-shot", temperature_used=temperature)


def estimate_lambda(probs: ProbabilityMatrix) -> LambdaEstimate:
    """Blending weight = mean over items of the maximum predicted probability."""
    if probs.num_items == 0:
        raise EmptyInputError("cannot estimate lambda from an empty matrix")
    value = float(probs.row_maxima().mean())
    return LambdaEstimate(value=min(value, 1.0), num_items=probs.num_items,
                          method="auto-confidence")


def confidence_histogram(probs: ProbabilityMatrix, num_bins: int) -> np.ndarray:
    """Counts of per-item max confidence over `num_bins` uniform bins on [0,1].

    Bins are half-open [lo, hi) except the last, which is closed at 1.0.
    """
    if num_bins < 1:
        raise ValueError("num_bins must be >= 1")
    edges = np.linspace(0.0, 1.0, num_bins + 1)
    counts, _ = np.histogram(probs.row_maxima(), bins=edges)
    return counts


def histogram_csv(counts: np.ndarray) -> str:
    num_bins = len(counts)
    edges = np.linspace(0.0, 1.0, num_bins + 1)
    lines = ["bin_lo,bin_hi,count"]
    for i, c in enumerate(counts):
        lines.append(f"{edges[i]:.6f},{edges[i + 1]:.6f},{int(c)}")
    return "\n".join(lines) + "\n"

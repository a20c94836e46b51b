"""Binary embedding/label file formats, dataset manifests, and seeded
few-shot episode sampling.

File layouts (all little-endian):
  embedding file: magic "SVLEMB1\\0" | version u32 (=1) | rows u32 | cols u32
                  | dtype u8 (1 = float32) | 3 pad bytes | rows*cols float32
  label file:     magic "SVLLAB1\\0" | version u32 (=1) | count u32 | count u32
  class names:    UTF-8 text, one name per line, index = line number
  manifest:       UTF-8 "key=value" lines
"""

from __future__ import annotations

import logging
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadMagicError,
    InvalidLabelError,
    ManifestError,
    MissingClassError,
    ShapeError,
    TruncatedFileError,
    UnknownDtypeError,
    VersionMismatchError,
)

logger = logging.getLogger(__name__)

EMB_MAGIC = b"SVLEMB1\x00"
LAB_MAGIC = b"SVLLAB1\x00"
FORMAT_VERSION = 1
DTYPE_FLOAT32 = 1

MANIFEST_REQUIRED_KEYS = (
    "dataset",
    "dim",
    "num_classes",
    "train_embeddings",
    "train_labels",
    "test_embeddings",
    "test_labels",
    "class_names",
)


@dataclass
class EmbeddingTable:
    """N x D feature matrix with item ids and encoder provenance."""

    ids: list
    features: np.ndarray
    encoder_id: str = ""
    normalized: bool = False

    def __post_init__(self):
        if self.features.ndim != 2:
            raise ShapeError("features must be 2-d")
        if len(self.ids) != self.features.shape[0]:
            raise ShapeError(
                f"{len(self.ids)} ids for {self.features.shape[0]} feature rows"
            )
        if self.normalized and self.features.shape[0] > 0:
            norms = np.linalg.norm(self.features, axis=1)
            if not np.allclose(norms, 1.0, atol=1e-4):
                raise ShapeError("normalized flag set but rows are not unit norm")

    @property
    def num_items(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass
class ClassSpace:
    """K class names plus an optional K x D text-embedding matrix."""

    names: list
    text_embeddings: np.ndarray | None = None
    prompt_template: str = ""

    def __post_init__(self):
        if not self.names:
            raise ManifestError("class space has no names")
        if len(set(self.names)) != len(self.names):
            raise ManifestError("class names are not unique")
        if self.text_embeddings is not None and self.text_embeddings.shape[0] != len(self.names):
            raise ShapeError(
                f"{self.text_embeddings.shape[0]} text embeddings for {len(self.names)} classes"
            )

    @property
    def num_classes(self) -> int:
        return len(self.names)


@dataclass
class LabelVector:
    """Per-item class indices in [0, K)."""

    labels: np.ndarray

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)

    def validate_range(self, num_classes: int) -> None:
        bad = np.nonzero((self.labels < 0) | (self.labels >= num_classes))[0]
        if bad.size:
            row = int(bad[0])
            raise InvalidLabelError(
                f"label {int(self.labels[row])} at row {row} outside [0, {num_classes})"
            )

    def __len__(self) -> int:
        return len(self.labels)


@dataclass
class Episode:
    """A seeded per-class sample of item indices."""

    shots: int
    selected: dict
    seed: int
    clamped_classes: list = field(default_factory=list)

    def all_indices(self) -> np.ndarray:
        out = []
        for c in sorted(self.selected):
            out.extend(self.selected[c])
        return np.asarray(out, dtype=np.int64)

    def episode_labels(self) -> np.ndarray:
        out = []
        for c in sorted(self.selected):
            out.extend([c] * len(self.selected[c]))
        return np.asarray(out, dtype=np.int64)


# ---------------------------------------------------------------------------
# binary matrix files


def write_matrix(path, matrix: np.ndarray, metadata: dict | None = None) -> None:
    """Write a float32 LE row-major matrix; metadata goes to a sidecar file."""
    matrix = np.ascontiguousarray(np.asarray(matrix, dtype="<f4"))
    if matrix.ndim != 2:
        raise ShapeError("only 2-d matrices are stored")
    header = EMB_MAGIC + struct.pack(
        "<IIIB3x", FORMAT_VERSION, matrix.shape[0], matrix.shape[1], DTYPE_FLOAT32
    )
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as f:
        f.write(header)
        f.write(matrix.tobytes(order="C"))
    os.replace(tmp, path)
    if metadata:
        with open(f"{path}.meta", "w", encoding="utf-8") as f:
            for k, v in metadata.items():
                f.write(f"{k}={v}\n")


def read_matrix(path):
    """Read a matrix file; returns (matrix, metadata dict)."""
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < 24:
        raise TruncatedFileError(f"{path}: shorter than the fixed header")
    if blob[:8] != EMB_MAGIC:
        raise BadMagicError(f"{path}: bad magic {blob[:8]!r}")
    version, rows, cols, dtype = struct.unpack("<IIIB", blob[8:21])
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"{path}: version {version}, expected {FORMAT_VERSION}")
    if dtype != DTYPE_FLOAT32:
        raise UnknownDtypeError(f"{path}: dtype code {dtype}")
    expected = 24 + rows * cols * 4
    if len(blob) < expected:
        raise TruncatedFileError(f"{path}: {len(blob)} bytes, header promises {expected}")
    data = np.frombuffer(blob[24:expected], dtype="<f4").reshape(rows, cols).copy()
    metadata = {}
    meta_path = f"{path}.meta"
    if os.path.exists(meta_path):
        with open(meta_path, encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if line and "=" in line:
                    k, v = line.split("=", 1)
                    metadata[k] = v
    return data, metadata


def write_labels(path, labels) -> None:
    labels = np.asarray(labels, dtype="<u4")
    header = LAB_MAGIC + struct.pack("<II", FORMAT_VERSION, labels.size)
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as f:
        f.write(header)
        f.write(labels.tobytes())
    os.replace(tmp, path)


def read_labels(path) -> np.ndarray:
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < 16:
        raise TruncatedFileError(f"{path}: shorter than the fixed header")
    if blob[:8] != LAB_MAGIC:
        raise BadMagicError(f"{path}: bad magic {blob[:8]!r}")
    version, count = struct.unpack("<II", blob[8:16])
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"{path}: version {version}, expected {FORMAT_VERSION}")
    expected = 16 + count * 4
    if len(blob) < expected:
        raise TruncatedFileError(f"{path}: {len(blob)} bytes, header promises {expected}")
    return np.frombuffer(blob[16:expected], dtype="<u4").astype(np.int64)


def write_class_names(path, names) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as f:
        for name in names:
            f.write(f"{name}\n")
    os.replace(tmp, path)


def read_class_names(path) -> list:
    with open(path, encoding="utf-8") as f:
        return [line.rstrip("\n") for line in f if line.rstrip("\n")]


# ---------------------------------------------------------------------------
# manifests and dataset loading


def read_manifest(path) -> dict:
    entries = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ManifestError(f"{path}:{lineno}: expected key=value, got {line!r}")
            k, v = line.split("=", 1)
            entries[k.strip()] = v.strip()
    missing = [k for k in MANIFEST_REQUIRED_KEYS if k not in entries]
    if missing:
        raise ManifestError(f"{path}: missing required keys {missing}")
    return entries


def write_manifest(path, entries: dict) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as f:
        for k, v in entries.items():
            f.write(f"{k}={v}\n")
    os.replace(tmp, path)


@dataclass
class Dataset:
    train: EmbeddingTable
    train_labels: LabelVector
    test: EmbeddingTable
    test_labels: LabelVector
    classes: ClassSpace
    name: str = ""


def _load_table(path, encoder_id: str, normalized: bool) -> EmbeddingTable:
    features, meta = read_matrix(path)
    ids = [f"item{i}" for i in range(features.shape[0])]
    return EmbeddingTable(
        ids=ids,
        features=features,
        encoder_id=meta.get("encoder", encoder_id),
        normalized=normalized,
    )


def load_dataset(manifest_path) -> Dataset:
    """Load and cross-validate the files a manifest references."""
    entries = read_manifest(manifest_path)
    base = os.path.dirname(os.path.abspath(manifest_path))

    def resolve(key):
        p = entries[key]
        return p if os.path.isabs(p) else os.path.join(base, p)

    try:
        dim = int(entries["dim"])
        num_classes = int(entries["num_classes"])
    except ValueError as e:
        raise ManifestError(f"{manifest_path}: non-integer dim/num_classes") from e
    encoder_id = entries.get("encoder", "")
    normalized = entries.get("normalized", "false").lower() == "true"

    train = _load_table(resolve("train_embeddings"), encoder_id, normalized)
    test = _load_table(resolve("test_embeddings"), encoder_id, normalized)
    for name, table in (("train", train), ("test", test)):
        if table.dim != dim:
            raise ManifestError(
                f"{name} embeddings have dim {table.dim}, manifest declares {dim}"
            )

    names = read_class_names(resolve("class_names"))
    if len(names) != num_classes:
        raise ManifestError(
            f"{len(names)} class names, manifest declares {num_classes}"
        )
    text_embeddings = None
    if "class_text_embeddings" in entries:
        text_embeddings, _ = read_matrix(resolve("class_text_embeddings"))
        if text_embeddings.shape[0] != num_classes:
            raise ManifestError(
                f"class text embeddings have {text_embeddings.shape[0]} rows, "
                f"expected {num_classes}"
            )
        if text_embeddings.shape[1] != dim:
            raise ManifestError(
                f"class text embeddings have dim {text_embeddings.shape[1]}, "
                f"embeddings have dim {dim}"
            )
    classes = ClassSpace(names=names, text_embeddings=text_embeddings)

    train_labels = LabelVector(read_labels(resolve("train_labels")))
    test_labels = LabelVector(read_labels(resolve("test_labels")))
    for name, table, labels in (
        ("train", train, train_labels),
        ("test", test, test_labels),
    ):
        if len(labels) != table.num_items:
            raise ManifestError(
                f"{name}: {len(labels)} labels for {table.num_items} items"
            )
        labels.validate_range(num_classes)

    return Dataset(
        train=train,
        train_labels=train_labels,
        test=test,
        test_labels=test_labels,
        classes=classes,
        name=entries["dataset"],
    )


# ---------------------------------------------------------------------------
# episode sampling


def validation_size(shots: int) -> int:
    """Per-class validation-set size for the blending-weight sweep."""
    return {1: 1, 2: 2}.get(shots, 4)


def _class_rng(seed: int, class_index: int, stream: int) -> np.random.Generator:
    # per-class sub-streams so the sample for one class is independent of
    # class ordering and of the other classes' pool sizes
    return np.random.default_rng([int(seed), int(class_index), int(stream)])


def sample_episode(labels, shots: int, seed: int,
                   num_classes: int | None = None) -> Episode:
    """Sample up to `shots` items per class, uniformly without replacement."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    labels = labels.labels if isinstance(labels, LabelVector) else np.asarray(labels)
    k = int(num_classes if num_classes is not None else labels.max() + 1)
    selected = {}
    clamped = []
    for c in range(k):
        pool = np.nonzero(labels == c)[0]
        if pool.size == 0:
            raise MissingClassError(f"class {c} has no items to sample from")
        take = min(shots, pool.size)
        if take < shots:
            clamped.append(c)
            logger.warning(
                "class %d has only %d items, clamping %d-shot episode", c, pool.size, shots
            )
        rng = _class_rng(seed, c, 0)
        picks = rng.choice(pool, size=take, replace=False)
        selected[c] = sorted(int(i) for i in picks)
    return Episode(shots=shots, selected=selected, seed=seed, clamped_classes=clamped)


def split_validation(labels, train_episode: Episode, shots: int, seed: int) -> Episode:
    """Draw extra held-out validation items per class, disjoint from training."""
    labels = labels.labels if isinstance(labels, LabelVector) else np.asarray(labels)
    want = validation_size(shots)
    k = max(train_episode.selected) + 1
    selected = {}
    clamped = []
    for c in range(k):
        used = set(train_episode.selected.get(c, ()))
        pool = np.asarray(
            [i for i in np.nonzero(labels == c)[0] if int(i) not in used],
            dtype=np.int64,
        )
        take = min(want, pool.size)
        if take < want:
            clamped.append(c)
            logger.warning(
                "class %d has only %d held-out items for validation (wanted %d)",
                c, pool.size, want,
            )
        rng = _class_rng(seed, c, 1)
        picks = rng.choice(pool, size=take, replace=False) if take else []
        selected[c] = sorted(int(i) for i in picks)
    return Episode(shots=want, selected=selected, seed=seed, clamped_classes=clamped)

"""Writers for the embedding-file interchange formats.

These mirror the consumer's on-disk contract exactly (all little-endian):
  embedding file: magic "SVLEMB1\\0" | version u32 (=1) | rows u32 | cols u32
                  | dtype u8 (1 = float32) | 3 pad bytes | rows*cols float32
  label file:     magic "SVLLAB1\\0" | version u32 (=1) | count u32 | count u32
  class names:    UTF-8 text, one name per line
  manifest:       UTF-8 "key=value" lines

This package deliberately does not import the consumer; the byte layout is
the interface.
"""

from __future__ import annotations

import os
import struct

import numpy as np

EMB_MAGIC = b"SVLEMB1\x00"
LAB_MAGIC = b"SVLLAB1\x00"
FORMAT_VERSION = 1
DTYPE_FLOAT32 = 1


def write_embeddings(path, matrix: np.ndarray, metadata: dict | None = None) -> None:
    """Write a float32 row-major matrix; metadata goes to a `.meta` sidecar."""
    matrix = np.ascontiguousarray(np.asarray(matrix, dtype="<f4"))
    if matrix.ndim != 2:
        raise ValueError("embedding matrix must be 2-d")
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


def read_embedding_header(path) -> tuple[int, int]:
    """Return (rows, cols) from an embedding file written by this package."""
    with open(path, "rb") as f:
        blob = f.read(24)
    if len(blob) < 24 or blob[:8] != EMB_MAGIC:
        raise ValueError(f"{path}: not an embedding file")
    _, rows, cols, _ = struct.unpack("<IIIB", blob[8:21])
    return rows, cols


def write_labels(path, labels) -> None:
    labels = np.asarray(labels, dtype="<u4")
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as f:
        f.write(LAB_MAGIC + struct.pack("<II", FORMAT_VERSION, labels.size))
        f.write(labels.tobytes())
    os.replace(tmp, path)


def write_class_names(path, names) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as f:
        for name in names:
            f.write(f"{name}\n")
    os.replace(tmp, path)


def write_manifest(path, entries: dict) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as f:
        for k, v in entries.items():
            f.write(f"{k}={v}\n")
    os.replace(tmp, path)

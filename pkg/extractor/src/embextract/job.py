"""Extraction jobs: run encoders over an image list / class list and emit
the interchange files."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .encoders import build_image_encoder, build_text_encoder
from .formats import (
    write_class_names,
    write_embeddings,
    write_labels,
    write_manifest,
)
from .naming import build_prompts, normalize_class_name

logger = logging.getLogger(__name__)


@dataclass
class ExtractionJob:
    """One extraction run over a list of images.

    `images` is a list of (path, label) pairs; label may be None for
    unlabeled pools. Paths resolve against `root`.
    """

    root: str
    images: list
    image_encoder: str
    out_dir: str
    text_encoder: str = "test-bow:dim=64"
    template: str = "a photo of a {label}."
    resize: int | None = None
    on_error: str = "fail"  # "fail" (fail-fast) | "skip" (skip-with-report)
    skipped: list = field(default_factory=list)

    def __post_init__(self):
        if self.template.count("{label}") != 1:
            raise ValueError(
                f'template must contain exactly one "{{label}}" placeholder: '
                f"{self.template!r}"
            )
        if self.on_error not in ("fail", "skip"):
            raise ValueError(f"on_error must be 'fail' or 'skip', got {self.on_error!r}")
        missing = [p for p, _ in self.images
                   if not os.path.exists(os.path.join(self.root, p))]
        if missing:
            raise FileNotFoundError(f"listed images do not exist: {missing[:5]}")


def read_image_list(path) -> list:
    """Read a tab-separated image list: `relative/path<TAB>label_index`,
    label optional. Blank lines and # comments ignored."""
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) == 1:
                out.append((parts[0], None))
            elif len(parts) == 2:
                out.append((parts[0], int(parts[1])))
            else:
                raise ValueError(f"{path}:{lineno}: expected path[<TAB>label]")
    return out


def extract_image_embeddings(job: ExtractionJob, prefix: str = "train"):
    """Encode every listed image in order; write `<prefix>.emb` (and
    `<prefix>.lab` when labels are present). Returns (rows, labels)."""
    encoder = build_image_encoder(job.image_encoder, resize=job.resize)
    rows, labels = [], []
    for rel_path, label in job.images:
        path = os.path.join(job.root, rel_path)
        try:
            with Image.open(path) as img:
                rows.append(encoder.encode(img))
        except (OSError, ValueError) as e:
            if job.on_error == "fail":
                raise
            logger.warning("skipping unreadable image %s: %s", rel_path, e)
            job.skipped.append((rel_path, str(e)))
            continue
        if label is not None:
            labels.append(label)

    matrix = np.stack(rows) if rows else np.zeros((0, encoder.dim), dtype=np.float32)
    os.makedirs(job.out_dir, exist_ok=True)
    write_embeddings(
        os.path.join(job.out_dir, f"{prefix}.emb"), matrix,
        metadata={"encoder": encoder.encoder_id,
                  "normalized": str(encoder.normalized).lower()})
    have_labels = any(label is not None for _, label in job.images)
    if have_labels:
        write_labels(os.path.join(job.out_dir, f"{prefix}.lab"), labels)
    return matrix, (np.asarray(labels) if have_labels else None)


def extract_text_embeddings(class_names: list, text_encoder: str, template: str,
                            out_dir: str, aliases: dict | None = None):
    """Encode one prompt per class; write classes.txt + classes.emb."""
    encoder = build_text_encoder(text_encoder)
    prompts = build_prompts(class_names, template, aliases)
    matrix = np.stack([encoder.encode(p) for p in prompts])
    os.makedirs(out_dir, exist_ok=True)
    write_class_names(os.path.join(out_dir, "classes.txt"),
                      [normalize_class_name(n, aliases) for n in class_names])
    write_embeddings(os.path.join(out_dir, "classes.emb"), matrix,
                     metadata={"encoder": encoder.encoder_id,
                               "template": template})
    return matrix, prompts


def write_dataset_manifest(out_dir: str, dataset: str, dim: int,
                           num_classes: int, with_text: bool = True) -> str:
    """Assemble the manifest for files previously written into out_dir."""
    entries = {
        "dataset": dataset,
        "dim": dim,
        "num_classes": num_classes,
        "train_embeddings": "train.emb",
        "train_labels": "train.lab",
        "test_embeddings": "test.emb",
        "test_labels": "test.lab",
        "class_names": "classes.txt",
    }
    if with_text:
        entries["class_text_embeddings"] = "classes.emb"
    path = os.path.join(out_dir, "manifest.txt")
    write_manifest(path, entries)
    return path

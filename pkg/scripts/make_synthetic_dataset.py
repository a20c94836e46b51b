#!/usr/bin/env python3
"""Generate a synthetic Gaussian-cluster dataset in the on-disk embedding
format, with class text embeddings aligned to the cluster means so the
zero-shot path is informative.

Usage:
    python3 scripts/make_synthetic_dataset.py --out data/synthetic \
        --classes 5 --dim 32 --separation 6 --train-per-class 40 \
        --test-per-class 200 --seed 0
"""

import argparse
import os

import numpy as np

from blendshot.store import (
    write_class_names,
    write_labels,
    write_manifest,
    write_matrix,
)


def make_clusters(num_classes, dim, separation, per_class, seed, sigma=1.0):
    rng = np.random.default_rng(seed)
    scale = separation / np.sqrt(2.0)
    means = np.zeros((num_classes, dim))
    means[np.arange(num_classes), np.arange(num_classes)] = scale
    labels = np.repeat(np.arange(num_classes), per_class)
    features = means[labels] + sigma * rng.standard_normal((labels.size, dim))
    return features.astype(np.float32), labels.astype(np.int64)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", required=True)
    ap.add_argument("--classes", type=int, default=5)
    ap.add_argument("--dim", type=int, default=32)
    ap.add_argument("--separation", type=float, default=6.0)
    ap.add_argument("--train-per-class", type=int, default=40)
    ap.add_argument("--test-per-class", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    os.makedirs(args.out, exist_ok=True)
    train_x, train_y = make_clusters(args.classes, args.dim, args.separation,
                                     args.train_per_class, args.seed)
    test_x, test_y = make_clusters(args.classes, args.dim, args.separation,
                                   args.test_per_class, args.seed + 1000)
    text = np.zeros((args.classes, args.dim), dtype=np.float32)
    text[np.arange(args.classes), np.arange(args.classes)] = 1.0

    write_matrix(os.path.join(args.out, "train.emb"), train_x)
    write_matrix(os.path.join(args.out, "test.emb"), test_x)
    write_matrix(os.path.join(args.out, "classes.emb"), text)
    write_labels(os.path.join(args.out, "train.lab"), train_y)
    write_labels(os.path.join(args.out, "test.lab"), test_y)
    write_class_names(os.path.join(args.out, "classes.txt"),
                      [f"class {c}" for c in range(args.classes)])
    write_manifest(os.path.join(args.out, "manifest.txt"), {
        "dataset": "synthetic",
        "dim": args.dim,
        "num_classes": args.classes,
        "train_embeddings": "train.emb",
        "train_labels": "train.lab",
        "test_embeddings": "test.emb",
        "test_labels": "test.lab",
        "class_names": "classes.txt",
        "class_text_embeddings": "classes.emb",
    })
    print(f"wrote synthetic dataset to {args.out}")


if __name__ == "__main__":
    main()

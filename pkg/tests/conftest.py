import numpy as np
import pytest

from blendshot.store import (
    write_class_names,
    write_labels,
    write_manifest,
    write_matrix,
)


def make_gaussian_clusters(num_classes, dim, separation, per_class, seed, sigma=1.0):
    """Isotropic Gaussian clusters with pairwise mean distance = separation.

    Means are scaled axis unit vectors, so distance between any two means is
    scale*sqrt(2); features are mean + N(0, sigma^2).
    """
    assert dim >= num_classes
    rng = np.random.default_rng(seed)
    scale = separation / np.sqrt(2.0)
    means = np.zeros((num_classes, dim))
    means[np.arange(num_classes), np.arange(num_classes)] = scale
    labels = np.repeat(np.arange(num_classes), per_class)
    features = means[labels] + sigma * rng.standard_normal((labels.size, dim))
    return features.astype(np.float32), labels.astype(np.int64)


def class_text_embeddings(num_classes, dim):
    """Unit vectors aligned with the cluster means of make_gaussian_clusters."""
    emb = np.zeros((num_classes, dim), dtype=np.float32)
    emb[np.arange(num_classes), np.arange(num_classes)] = 1.0
    return emb


def write_synthetic_dataset(directory, num_classes=5, dim=32, separation=6.0,
                            train_per_class=40, test_per_class=200, seed=0,
                            with_text=True):
    """Write a complete manifest-backed dataset; returns the manifest path."""
    directory = str(directory)
    train_x, train_y = make_gaussian_clusters(num_classes, dim, separation,
                                              train_per_class, seed)
    test_x, test_y = make_gaussian_clusters(num_classes, dim, separation,
                                            test_per_class, seed + 1000)
    write_matrix(f"{directory}/train.emb", train_x)
    write_matrix(f"{directory}/test.emb", test_x)
    write_labels(f"{directory}/train.lab", train_y)
    write_labels(f"{directory}/test.lab", test_y)
    write_class_names(f"{directory}/classes.txt",
                      [f"class {c}" for c in range(num_classes)])
    entries = {
        "dataset": "synthetic",
        "dim": dim,
        "num_classes": num_classes,
        "train_embeddings": "train.emb",
        "train_labels": "train.lab",
        "test_embeddings": "test.emb",
        "test_labels": "test.lab",
        "class_names": "classes.txt",
    }
    if with_text:
        write_matrix(f"{directory}/classes.emb",
                     class_text_embeddings(num_classes, dim))
        entries["class_text_embeddings"] = "classes.emb"
    manifest = f"{directory}/manifest.txt"
    write_manifest(manifest, entries)
    return manifest


def random_row_stochastic(rng, n, k):
    p = rng.random((n, k)) + 1e-9
    return p / p.sum(axis=1, keepdims=True)


@pytest.fixture
def synthetic_manifest(tmp_path):
    return write_synthetic_dataset(tmp_path)

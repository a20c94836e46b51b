import numpy as np
import pytest
from PIL import Image

CLASS_NAMES = ["red_fox", "gazelleGrants", "CNV", "DME", "zebra"]
CLASS_COLORS = [(200, 40, 40), (40, 200, 40), (40, 40, 200),
                (200, 200, 40), (160, 160, 160)]


def make_image(class_index: int, rng, size: int = 48) -> Image.Image:
    """A noisy solid-color image; color identifies the class."""
    base = np.array(CLASS_COLORS[class_index], dtype=np.float64)
    noise = rng.normal(0.0, 25.0, size=(size, size, 3))
    pixels = np.clip(base + noise, 0, 255).astype(np.uint8)
    return Image.fromarray(pixels, "RGB")


def write_image_corpus(root, per_class_train=12, per_class_test=8, seed=0):
    """Write ~100 PNGs across 5 classes plus train/test list files.

    Returns (train_list_path, test_list_path).
    """
    rng = np.random.default_rng(seed)
    lists = {}
    for split, per_class in (("train", per_class_train), ("test", per_class_test)):
        lines = []
        for c in range(len(CLASS_NAMES)):
            for i in range(per_class):
                rel = f"{split}_{c}_{i}.png"
                make_image(c, rng).save(root / rel)
                lines.append(f"{rel}\t{c}")
        list_path = root / f"{split}_list.txt"
        list_path.write_text("\n".join(lines) + "\n")
        lists[split] = str(list_path)
    (root / "raw_classes.txt").write_text("\n".join(CLASS_NAMES) + "\n")
    return lists["train"], lists["test"]


@pytest.fixture
def image_corpus(tmp_path):
    train_list, test_list = write_image_corpus(tmp_path)
    return tmp_path, train_list, test_list

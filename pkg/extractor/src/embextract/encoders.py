"""Image and text encoders behind a string spec.

Spec syntax: `name:key=value:key=value`, e.g.

  test-projection:dim=64:seed=0   deterministic pixel random-projection
                                  image encoder (no ML dependencies)
  test-bow:dim=64                 deterministic hashed bag-of-words text encoder
  torchvision:resnet18            pooled backbone features (optional; requires
                                  torchvision; `checkpoint=PATH` loads weights,
                                  otherwise the architecture's default init)

The test encoders exist so the full extraction pipeline — files, manifests,
and the downstream consumer — can be exercised hermetically; they are
deterministic for a fixed spec and input.
"""

from __future__ import annotations

import hashlib
import re

import numpy as np
from PIL import Image


def parse_encoder_spec(spec: str) -> tuple[str, list, dict]:
    """Split `name[:arg][:key=value]...` into (name, bare args, options)."""
    parts = spec.split(":")
    name, args, options = parts[0], [], {}
    for part in parts[1:]:
        if "=" in part:
            k, v = part.split("=", 1)
            options[k] = v
        elif part:
            args.append(part)
    return name, args, options


class ProjectionImageEncoder:
    """Resize to a fixed grid, flatten RGB pixels, apply a seeded random
    projection. Deterministic and dependency-free; for pipeline testing."""

    def __init__(self, dim: int = 64, seed: int = 0, resize: int = 32):
        self.dim = dim
        self.resize = resize
        rng = np.random.default_rng([int(seed), 0x1A3E])
        n_pixels = resize * resize * 3
        self.projection = rng.standard_normal((n_pixels, dim)) / np.sqrt(n_pixels)
        self.encoder_id = f"test-projection:dim={dim}:seed={seed}"
        self.normalized = False

    def encode(self, image: Image.Image) -> np.ndarray:
        small = image.convert("RGB").resize((self.resize, self.resize),
                                            Image.BILINEAR)
        pixels = np.asarray(small, dtype=np.float64).reshape(-1) / 255.0
        return (pixels @ self.projection).astype(np.float32)


class BagOfWordsTextEncoder:
    """Hash lowercase word tokens into a fixed-dimension signed count vector.
    Deterministic across processes (sha256, not Python's salted hash)."""

    def __init__(self, dim: int = 64):
        self.dim = dim
        self.encoder_id = f"test-bow:dim={dim}"
        self.normalized = False

    def encode(self, text: str) -> np.ndarray:
        out = np.zeros(self.dim, dtype=np.float32)
        for token in re.findall(r"[a-z0-9]+", text.lower()):
            digest = hashlib.sha256(token.encode()).digest()
            index = int.from_bytes(digest[:4], "little") % self.dim
            sign = 1.0 if digest[4] % 2 == 0 else -1.0
            out[index] += sign
        return out


class TorchvisionImageEncoder:
    """Pooled features from a torchvision backbone (classifier head removed).
    Loads a local checkpoint if given; never downloads weights."""

    def __init__(self, model: str = "resnet18", checkpoint: str | None = None,
                 resize: int = 224):
        import torch
        import torchvision.models as models
        import torchvision.transforms as transforms

        self._torch = torch
        net = getattr(models, model)(weights=None)
        if checkpoint:
            net.load_state_dict(torch.load(checkpoint, map_location="cpu"))
        # expose pooled backbone features instead of class logits
        if hasattr(net, "fc"):
            net.fc = torch.nn.Identity()
        elif hasattr(net, "classifier"):
            net.classifier = torch.nn.Identity()
        net.eval()
        self.net = net
        self.transform = transforms.Compose([
            transforms.Resize(resize + 32),
            transforms.CenterCrop(resize),
            transforms.ToTensor(),
            transforms.Normalize(mean=[0.485, 0.456, 0.406],
                                 std=[0.229, 0.224, 0.225]),
        ])
        src = checkpoint or "default-init"
        self.encoder_id = f"torchvision:{model}:{src}"
        self.normalized = False

    def encode(self, image: Image.Image) -> np.ndarray:
        tensor = self.transform(image.convert("RGB")).unsqueeze(0)
        with self._torch.no_grad():
            features = self.net(tensor)
        return features.squeeze(0).numpy().astype(np.float32)


def build_image_encoder(spec: str, resize: int | None = None):
    name, args, opts = parse_encoder_spec(spec)
    if name == "test-projection":
        return ProjectionImageEncoder(dim=int(opts.get("dim", 64)),
                                      seed=int(opts.get("seed", 0)),
                                      resize=resize or int(opts.get("resize", 32)))
    if name == "torchvision":
        model = args[0] if args else opts.get("model", "resnet18")
        return TorchvisionImageEncoder(model=model,
                                       checkpoint=opts.get("checkpoint"),
                                       resize=resize or 224)
    raise ValueError(f"unknown image encoder {name!r}")


def build_text_encoder(spec: str):
    name, _, opts = parse_encoder_spec(spec)
    if name == "test-bow":
        return BagOfWordsTextEncoder(dim=int(opts.get("dim", 64)))
    raise ValueError(f"unknown text encoder {name!r}")

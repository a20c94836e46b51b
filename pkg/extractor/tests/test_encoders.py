import numpy as np
import pytest

from conftest import make_image
from embextract.encoders import (
    BagOfWordsTextEncoder,
    ProjectionImageEncoder,
    build_image_encoder,
    build_text_encoder,
    parse_encoder_spec,
)


class TestSpecParsing:
    def test_options(self):
        assert parse_encoder_spec("test-projection:dim=64:seed=3") == (
            "test-projection", [], {"dim": "64", "seed": "3"})

    def test_bare_args(self):
        assert parse_encoder_spec("torchvision:resnet18") == (
            "torchvision", ["resnet18"], {})

    def test_unknown_encoders_rejected(self):
        with pytest.raises(ValueError):
            build_image_encoder("nope")
        with pytest.raises(ValueError):
            build_text_encoder("nope:dim=4")


class TestProjectionImageEncoder:
    def test_output_dim_and_dtype(self):
        enc = build_image_encoder("test-projection:dim=16:seed=0")
        vec = enc.encode(make_image(0, np.random.default_rng(0)))
        assert vec.shape == (16,)
        assert vec.dtype == np.float32

    def test_deterministic_for_same_image(self):
        rng = np.random.default_rng(1)
        img = make_image(1, rng)
        enc = ProjectionImageEncoder(dim=8, seed=0)
        np.testing.assert_array_equal(enc.encode(img), enc.encode(img))

    def test_seed_changes_projection(self):
        img = make_image(0, np.random.default_rng(0))
        a = ProjectionImageEncoder(dim=8, seed=0).encode(img)
        b = ProjectionImageEncoder(dim=8, seed=1).encode(img)
        assert not np.array_equal(a, b)

    def test_encoder_id_records_spec(self):
        enc = ProjectionImageEncoder(dim=8, seed=2)
        assert enc.encoder_id == "test-projection:dim=8:seed=2"

    def test_different_colors_give_different_features(self):
        rng = np.random.default_rng(0)
        enc = ProjectionImageEncoder(dim=16, seed=0)
        a = enc.encode(make_image(0, rng))
        b = enc.encode(make_image(1, rng))
        assert np.linalg.norm(a - b) > 0.1


class TestBagOfWordsTextEncoder:
    def test_same_prompt_identical_rows(self):
        enc = BagOfWordsTextEncoder(dim=32)
        np.testing.assert_array_equal(enc.encode("a photo of a dog."),
                                      enc.encode("a photo of a dog."))

    def test_token_order_irrelevant_but_content_matters(self):
        enc = BagOfWordsTextEncoder(dim=64)
        np.testing.assert_array_equal(enc.encode("dog photo"), enc.encode("photo dog"))
        assert not np.array_equal(enc.encode("dog"), enc.encode("cat"))

    def test_case_insensitive(self):
        enc = BagOfWordsTextEncoder(dim=64)
        np.testing.assert_array_equal(enc.encode("Dog"), enc.encode("dog"))

    def test_dim(self):
        assert build_text_encoder("test-bow:dim=24").encode("x").shape == (24,)


class TestTorchvisionEncoder:
    def test_pooled_features_deterministic(self):
        pytest.importorskip("torchvision")
        import torch

        torch.manual_seed(0)
        enc = build_image_encoder("torchvision:resnet18")
        img = make_image(0, np.random.default_rng(0), size=64)
        a = enc.encode(img)
        b = enc.encode(img)
        assert a.shape == (512,)  # resnet18 pooled features, head removed
        np.testing.assert_array_equal(a, b)

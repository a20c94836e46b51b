import numpy as np
import pytest

from conftest import CLASS_NAMES, make_image
from embextract.formats import read_embedding_header
from embextract.job import (
    ExtractionJob,
    extract_image_embeddings,
    extract_text_embeddings,
    read_image_list,
    write_dataset_manifest,
)

ENCODER = "test-projection:dim=16:seed=0"


def _write_images(tmp_path, count=4, class_index=0):
    rng = np.random.default_rng(0)
    names = []
    for i in range(count):
        name = f"img{i}.png"
        make_image(class_index, rng).save(tmp_path / name)
        names.append(name)
    return names


class TestImageList:
    def test_parse_with_and_without_labels(self, tmp_path):
        path = tmp_path / "list.txt"
        path.write_text("# comment\na.png\t0\n\nb.png\n")
        assert read_image_list(path) == [("a.png", 0), ("b.png", None)]

    def test_malformed_line_rejected(self, tmp_path):
        path = tmp_path / "list.txt"
        path.write_text("a.png\t0\textra\n")
        with pytest.raises(ValueError):
            read_image_list(path)


class TestExtractionJob:
    def test_missing_image_rejected_up_front(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            ExtractionJob(root=str(tmp_path), images=[("ghost.png", 0)],
                          image_encoder=ENCODER, out_dir=str(tmp_path / "out"))

    def test_bad_template_rejected(self, tmp_path):
        names = _write_images(tmp_path, 1)
        with pytest.raises(ValueError):
            ExtractionJob(root=str(tmp_path), images=[(names[0], 0)],
                          image_encoder=ENCODER, out_dir=str(tmp_path / "out"),
                          template="no placeholder")

    def test_row_count_matches_list_fail_fast(self, tmp_path):
        names = _write_images(tmp_path, 5)
        job = ExtractionJob(root=str(tmp_path),
                            images=[(n, i % 2) for i, n in enumerate(names)],
                            image_encoder=ENCODER, out_dir=str(tmp_path / "out"))
        matrix, labels = extract_image_embeddings(job)
        assert matrix.shape == (5, 16)
        assert list(labels) == [0, 1, 0, 1, 0]
        assert read_embedding_header(tmp_path / "out" / "train.emb") == (5, 16)

    def test_identical_files_give_identical_rows(self, tmp_path):
        names = _write_images(tmp_path, 1)
        data = (tmp_path / names[0]).read_bytes()
        (tmp_path / "copy.png").write_bytes(data)
        job = ExtractionJob(root=str(tmp_path),
                            images=[(names[0], 0), ("copy.png", 0)],
                            image_encoder=ENCODER, out_dir=str(tmp_path / "out"))
        matrix, _ = extract_image_embeddings(job)
        np.testing.assert_array_equal(matrix[0], matrix[1])

    def test_corrupt_image_fail_fast(self, tmp_path):
        names = _write_images(tmp_path, 1)
        (tmp_path / "bad.png").write_bytes(b"not a png at all")
        job = ExtractionJob(root=str(tmp_path),
                            images=[(names[0], 0), ("bad.png", 0)],
                            image_encoder=ENCODER, out_dir=str(tmp_path / "out"))
        with pytest.raises(OSError):
            extract_image_embeddings(job)

    def test_corrupt_image_skip_with_report(self, tmp_path):
        names = _write_images(tmp_path, 2)
        (tmp_path / "bad.png").write_bytes(b"not a png at all")
        job = ExtractionJob(root=str(tmp_path),
                            images=[(names[0], 0), ("bad.png", 1), (names[1], 1)],
                            image_encoder=ENCODER, out_dir=str(tmp_path / "out"),
                            on_error="skip")
        matrix, labels = extract_image_embeddings(job)
        assert matrix.shape[0] == 2
        assert list(labels) == [0, 1]
        assert len(job.skipped) == 1 and job.skipped[0][0] == "bad.png"

    def test_metadata_sidecar_records_encoder(self, tmp_path):
        names = _write_images(tmp_path, 1)
        job = ExtractionJob(root=str(tmp_path), images=[(names[0], 0)],
                            image_encoder=ENCODER, out_dir=str(tmp_path / "out"))
        extract_image_embeddings(job)
        meta = (tmp_path / "out" / "train.emb.meta").read_text()
        assert f"encoder={ENCODER}" in meta


class TestTextExtraction:
    def test_one_row_per_class_and_normalized_names(self, tmp_path):
        matrix, prompts = extract_text_embeddings(
            CLASS_NAMES, "test-bow:dim=32", "a photo of a {label}.",
            str(tmp_path))
        assert matrix.shape == (5, 32)
        assert prompts[0] == "a photo of a red fox."
        assert prompts[2] == "a photo of a Choroidal Neovascularization."
        names = (tmp_path / "classes.txt").read_text().splitlines()
        assert names == ["red fox", "gazelle grants",
                         "Choroidal Neovascularization",
                         "Diabetic Macular Edema", "zebra"]

    def test_same_class_list_is_deterministic(self, tmp_path):
        a, _ = extract_text_embeddings(CLASS_NAMES, "test-bow:dim=32",
                                       "{label}", str(tmp_path / "a"))
        b, _ = extract_text_embeddings(CLASS_NAMES, "test-bow:dim=32",
                                       "{label}", str(tmp_path / "b"))
        np.testing.assert_array_equal(a, b)


class TestManifest:
    def test_manifest_written_with_expected_keys(self, tmp_path):
        path = write_dataset_manifest(str(tmp_path), "demo", 16, 5)
        text = (tmp_path / "manifest.txt").read_text()
        assert path.endswith("manifest.txt")
        for key in ("dataset=demo", "dim=16", "num_classes=5",
                    "train_embeddings=train.emb", "class_text_embeddings=classes.emb"):
            assert key in text

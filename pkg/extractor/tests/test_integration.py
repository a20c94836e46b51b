"""Acceptance: files emitted for a ~100-image corpus pass the consumer's
`extract-check` validator and support a successful zero-shot run.

The consumer is exercised only through its installed CLI (subprocess) — the
byte formats and manifest are the entire interface.
"""

import shutil
import subprocess

import pytest

from embextract.cli import main

IMAGE_ENCODER = "test-projection:dim=32:seed=0"
TEXT_ENCODER = "test-bow:dim=32"

pytestmark = pytest.mark.skipif(shutil.which("blendshot") is None,
                                reason="consumer CLI not installed")


def _blendshot(*args):
    return subprocess.run(["blendshot", *args], capture_output=True, text=True)


@pytest.fixture
def extracted(image_corpus, tmp_path_factory):
    root, train_list, test_list = image_corpus
    out = tmp_path_factory.mktemp("extracted")
    assert main(["images", "--list", train_list, "--root", str(root),
                 "--encoder", IMAGE_ENCODER, "--out", str(out),
                 "--prefix", "train"]) == 0
    assert main(["images", "--list", test_list, "--root", str(root),
                 "--encoder", IMAGE_ENCODER, "--out", str(out),
                 "--prefix", "test"]) == 0
    assert main(["text", "--classes", str(root / "raw_classes.txt"),
                 "--encoder", TEXT_ENCODER,
                 "--template", "a photo of a {label}.",
                 "--out", str(out)]) == 0
    assert main(["manifest", "--out", str(out), "--dataset", "pngdemo"]) == 0
    return out


class TestFormatConformance:
    def test_every_file_passes_extract_check(self, extracted):
        proc = _blendshot(
            "extract-check",
            str(extracted / "train.emb"), str(extracted / "test.emb"),
            str(extracted / "classes.emb"),
            "--manifest", str(extracted / "manifest.txt"))
        assert proc.returncode == 0, proc.stdout + proc.stderr
        assert "FAIL" not in proc.stdout

    def test_zero_shot_run_succeeds(self, extracted, tmp_path):
        out = tmp_path / "zs"
        proc = _blendshot("zeroshot", "--manifest",
                          str(extracted / "manifest.txt"), "--out", str(out))
        assert proc.returncode == 0, proc.stdout + proc.stderr
        assert "top1=" in proc.stdout
        assert (out / "report.csv").exists()

    def test_low_shot_adaptation_runs_on_extracted_files(self, extracted, tmp_path):
        out = tmp_path / "run"
        proc = _blendshot("adapt", "--manifest", str(extracted / "manifest.txt"),
                          "--method", "svl-adapter-auto", "--shots", "4",
                          "--seeds", "0", "--epochs", "3", "--out", str(out))
        assert proc.returncode == 0, proc.stdout + proc.stderr
        assert (out / "runs.csv").exists()

    def test_extraction_is_reproducible_byte_for_byte(self, image_corpus,
                                                      tmp_path_factory):
        root, train_list, _ = image_corpus
        blobs = []
        for i in range(2):
            out = tmp_path_factory.mktemp(f"rep{i}")
            assert main(["images", "--list", train_list, "--root", str(root),
                         "--encoder", IMAGE_ENCODER, "--out", str(out)]) == 0
            blobs.append((out / "train.emb").read_bytes())
        assert blobs[0] == blobs[1]

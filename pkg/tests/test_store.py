import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import array_shapes, arrays

from blendshot.errors import (
    BadMagicError,
    InvalidLabelError,
    ManifestError,
    MissingClassError,
    TruncatedFileError,
    UnknownDtypeError,
    VersionMismatchError,
)
from blendshot.store import (
    load_dataset,
    read_labels,
    read_matrix,
    sample_episode,
    split_validation,
    validation_size,
    write_labels,
    write_matrix,
)
from conftest import write_synthetic_dataset


class TestMatrixRoundTrip:
    def test_bit_exact_round_trip(self, tmp_path):
        path = tmp_path / "m.emb"
        m = np.arange(12, dtype=np.float32).reshape(3, 4) * 0.37
        write_matrix(path, m, {"encoder": "test-encoder", "normalized": "false"})
        back, meta = read_matrix(path)
        assert back.tobytes() == m.tobytes()
        assert meta["encoder"] == "test-encoder"

    def test_empty_matrix(self, tmp_path):
        path = tmp_path / "e.emb"
        write_matrix(path, np.zeros((0, 7), dtype=np.float32))
        back, _ = read_matrix(path)
        assert back.shape == (0, 7)

    def test_corrupted_magic(self, tmp_path):
        path = tmp_path / "bad.emb"
        write_matrix(path, np.ones((2, 2), dtype=np.float32))
        blob = bytearray(path.read_bytes())
        blob[0] ^= 0xFF
        path.write_bytes(bytes(blob))
        with pytest.raises(BadMagicError):
            read_matrix(path)

    def test_version_mismatch(self, tmp_path):
        path = tmp_path / "v.emb"
        write_matrix(path, np.ones((2, 2), dtype=np.float32))
        blob = bytearray(path.read_bytes())
        blob[8] = 99
        path.write_bytes(bytes(blob))
        with pytest.raises(VersionMismatchError):
            read_matrix(path)

    def test_unknown_dtype(self, tmp_path):
        path = tmp_path / "d.emb"
        write_matrix(path, np.ones((2, 2), dtype=np.float32))
        blob = bytearray(path.read_bytes())
        blob[20] = 42
        path.write_bytes(bytes(blob))
        with pytest.raises(UnknownDtypeError):
            read_matrix(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "t.emb"
        write_matrix(path, np.ones((4, 4), dtype=np.float32))
        blob = path.read_bytes()
        path.write_bytes(blob[:-8])
        with pytest.raises(TruncatedFileError):
            read_matrix(path)

    def test_header_layout(self, tmp_path):
        path = tmp_path / "h.emb"
        write_matrix(path, np.zeros((3, 5), dtype=np.float32))
        blob = path.read_bytes()
        assert blob[:8] == b"SVLEMB1\x00"
        assert int.from_bytes(blob[8:12], "little") == 1
        assert int.from_bytes(blob[12:16], "little") == 3
        assert int.from_bytes(blob[16:20], "little") == 5
        assert blob[20] == 1
        assert blob[21:24] == b"\x00\x00\x00"
        assert len(blob) == 24 + 3 * 5 * 4

    @settings(deadline=None, max_examples=30)
    @given(arrays(np.float32, array_shapes(min_dims=2, max_dims=2, max_side=8),
                  elements=st.floats(-1e6, 1e6, width=32)))
    def test_round_trip_property(self, tmp_path_factory, m):
        path = tmp_path_factory.mktemp("rt") / "m.emb"
        write_matrix(path, m)
        back, _ = read_matrix(path)
        assert back.tobytes() == np.ascontiguousarray(m).tobytes()


class TestLabelFiles:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "l.lab"
        labels = np.array([0, 3, 1, 2, 2])
        write_labels(path, labels)
        np.testing.assert_array_equal(read_labels(path), labels)
        assert path.read_bytes()[:8] == b"SVLLAB1\x00"

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "l.lab"
        path.write_bytes(b"NOTLABEL" + b"\x00" * 8)
        with pytest.raises(BadMagicError):
            read_labels(path)


class TestLoadDataset:
    def test_loads_consistent_dataset(self, synthetic_manifest):
        ds = load_dataset(synthetic_manifest)
        assert ds.train.num_items == 200
        assert ds.test.num_items == 1000
        assert ds.classes.num_classes == 5
        assert ds.train.dim == 32

    def test_label_out_of_range(self, tmp_path):
        manifest = write_synthetic_dataset(tmp_path)
        labels = read_labels(tmp_path / "train.lab")
        labels[17] = 5  # == num_classes
        write_labels(tmp_path / "train.lab", labels)
        with pytest.raises(InvalidLabelError, match="row 17"):
            load_dataset(manifest)

    def test_dimension_mismatch(self, tmp_path):
        manifest = write_synthetic_dataset(tmp_path)
        write_matrix(tmp_path / "classes.emb", np.zeros((5, 16), dtype=np.float32))
        with pytest.raises(ManifestError):
            load_dataset(manifest)

    def test_missing_file(self, tmp_path):
        manifest = write_synthetic_dataset(tmp_path)
        (tmp_path / "test.emb").unlink()
        with pytest.raises(OSError):
            load_dataset(manifest)

    def test_missing_manifest_key(self, tmp_path):
        manifest = write_synthetic_dataset(tmp_path)
        text = (tmp_path / "manifest.txt").read_text()
        (tmp_path / "manifest.txt").write_text(
            "\n".join(l for l in text.splitlines() if not l.startswith("class_names")))
        with pytest.raises(ManifestError, match="class_names"):
            load_dataset(manifest)


class TestEpisodes:
    def test_forced_choice(self):
        labels = np.array([0, 1, 2])
        ep = sample_episode(labels, shots=1, seed=0)
        assert ep.selected == {0: [0], 1: [1], 2: [2]}

    def test_deterministic_and_seed_sensitive(self):
        labels = np.repeat(np.arange(3), 100)
        a = sample_episode(labels, shots=8, seed=0)
        b = sample_episode(labels, shots=8, seed=0)
        c = sample_episode(labels, shots=8, seed=1)
        assert a.selected == b.selected
        assert a.selected != c.selected

    def test_clamping_with_warning(self, caplog):
        labels = np.array([0] * 10 + [1] * 20)
        with caplog.at_level("WARNING"):
            ep = sample_episode(labels, shots=16, seed=0)
        assert len(ep.selected[0]) == 10
        assert len(ep.selected[1]) == 16
        assert ep.clamped_classes == [0]
        assert "clamping" in caplog.text

    def test_missing_class(self):
        labels = np.array([0, 0, 2, 2])
        with pytest.raises(MissingClassError):
            sample_episode(labels, shots=1, seed=0, num_classes=3)

    def test_no_duplicates(self):
        labels = np.repeat(np.arange(4), 20)
        ep = sample_episode(labels, shots=16, seed=3)
        idx = ep.all_indices()
        assert len(set(idx.tolist())) == idx.size

    @settings(deadline=None, max_examples=25)
    @given(st.integers(0, 1000), st.sampled_from([1, 2, 4, 8, 16]))
    def test_selection_matches_labels(self, seed, shots):
        labels = np.random.default_rng(99).integers(0, 4, size=120)
        ep = sample_episode(labels, shots=shots, seed=seed, num_classes=4)
        for c, idx in ep.selected.items():
            assert all(labels[i] == c for i in idx)
            assert len(idx) == min(shots, int((labels == c).sum()))


class TestValidationSplit:
    @pytest.mark.parametrize("shots,expected", [(1, 1), (2, 2), (4, 4), (8, 4), (16, 4)])
    def test_sizes(self, shots, expected):
        assert validation_size(shots) == expected

    @pytest.mark.parametrize("shots", [1, 2, 4, 8, 16])
    def test_disjoint_from_training(self, shots):
        labels = np.repeat(np.arange(5), 40)
        train = sample_episode(labels, shots=shots, seed=7)
        val = split_validation(labels, train, shots=shots, seed=7)
        for c in range(5):
            assert not set(train.selected[c]) & set(val.selected[c])
            assert len(val.selected[c]) == validation_size(shots)

    def test_insufficient_items_clamped(self, caplog):
        labels = np.array([0] * 2 + [1] * 10)
        train = sample_episode(labels, shots=1, seed=0)
        with caplog.at_level("WARNING"):
            val = split_validation(labels, train, shots=16, seed=0)
        assert len(val.selected[0]) == 1  # 2 items, 1 used by training
        assert 0 in val.clamped_classes

"""
Unit tests for synthetic data, IDX loading and Dirichlet partitioning.
"""

import struct

import numpy as np
import pytest

from src.data_plane import (
    IDX_IMAGE_MAGIC,
    IDX_LABEL_MAGIC,
    Dataset,
    PartitionConfig,
    dirichlet_partition,
    holdout_split,
    label_entropy,
    load_idx,
    synth_classification,
)
from src.shared.exceptions import (
    DataError,
    IdxCountMismatchError,
    IdxMagicError,
    IdxTruncatedError,
    PartitionError,
)


# ─── Fixtures ────────────────────────────────────────────────


def write_images(path, pixels: list[list[int]], rows: int, cols: int, magic=IDX_IMAGE_MAGIC):
    header = struct.pack(">4I", magic, len(pixels), rows, cols)
    path.write_bytes(header + bytes(v for image in pixels for v in image))
    return path


def write_labels(path, labels: list[int], magic=IDX_LABEL_MAGIC):
    path.write_bytes(struct.pack(">2I", magic, len(labels)) + bytes(labels))
    return path


def counts_differ_by_one(labels: np.ndarray) -> bool:
    counts = np.bincount(labels)
    return int(counts.max() - counts.min()) <= 1


# ─── Synthetic data ──────────────────────────────────────────


class TestSynthClassification:

    def test_single_class(self):
        ds = synth_classification(n=20, dim=3, classes=1, cluster_spread=1.0, seed=0)
        assert set(ds.labels.tolist()) == {0}

    def test_deterministic(self):
        a = synth_classification(n=50, dim=4, classes=5, cluster_spread=1.0, seed=7)
        b = synth_classification(n=50, dim=4, classes=5, cluster_spread=1.0, seed=7)
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_classes_balanced(self):
        ds = synth_classification(n=103, dim=2, classes=10, cluster_spread=1.0, seed=0)
        counts = np.bincount(ds.labels)
        assert counts.max() - counts.min() <= 1

    def test_zero_spread_is_nearest_mean_separable(self):
        ds = synth_classification(n=200, dim=6, classes=4, cluster_spread=0.0, seed=1)
        means = np.stack([ds.features[ds.labels == c].mean(axis=0) for c in range(4)])
        dists = ((ds.features[:, None, :] - means[None, :, :]) ** 2).sum(axis=2)
        assert np.mean(dists.argmin(axis=1) == ds.labels) == 1.0

    def test_one_cluster_per_class_is_the_default(self):
        a = synth_classification(n=60, dim=3, classes=4, cluster_spread=0.5, seed=2)
        b = synth_classification(n=60, dim=3, classes=4, cluster_spread=0.5, seed=2, clusters_per_class=1)
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_several_clusters_per_class(self):
        ds = synth_classification(
            n=300, dim=4, classes=2, cluster_spread=0.0, seed=3, clusters_per_class=3,
        )
        for c in range(2):
            centers = np.unique(ds.features[ds.labels == c], axis=0)
            assert 1 < len(centers) <= 3
        assert counts_differ_by_one(ds.labels)

    def test_bad_arguments(self):
        with pytest.raises(DataError):
            synth_classification(n=3, dim=2, classes=5, cluster_spread=1.0, seed=0)
        with pytest.raises(DataError):
            synth_classification(n=10, dim=2, classes=2, cluster_spread=1.0, seed=0, clusters_per_class=0)

    def test_dataset_validates_rows(self):
        with pytest.raises(DataError):
            Dataset(np.zeros((3, 2)), np.zeros(2, dtype=np.int64))


# ─── IDX files ───────────────────────────────────────────────


class TestLoadIdx:

    def test_single_pixel_fixture(self, tmp_path):
        images = write_images(tmp_path / "img.idx", [[255]], 1, 1)
        labels = write_labels(tmp_path / "lbl.idx", [3])
        ds = load_idx(images, labels)
        np.testing.assert_array_equal(ds.features, [[1.0]])
        np.testing.assert_array_equal(ds.labels, [3])

    def test_flattens_and_scales(self, tmp_path):
        images = write_images(tmp_path / "img.idx", [[0, 51, 102, 255], [255, 0, 0, 0]], 2, 2)
        labels = write_labels(tmp_path / "lbl.idx", [1, 0])
        ds = load_idx(images, labels)
        assert ds.features.shape == (2, 4)
        np.testing.assert_allclose(ds.features[0], [0.0, 0.2, 0.4, 1.0])
        assert ds.features.dtype == np.float64
        assert not ds.features.flags.writeable

    def test_count_mismatch(self, tmp_path):
        images = write_images(tmp_path / "img.idx", [[1], [2]], 1, 1)
        labels = write_labels(tmp_path / "lbl.idx", [0])
        with pytest.raises(IdxCountMismatchError):
            load_idx(images, labels)

    def test_empty_file_is_truncated(self, tmp_path):
        images = tmp_path / "img.idx"
        images.write_bytes(b"")
        labels = write_labels(tmp_path / "lbl.idx", [0])
        with pytest.raises(IdxTruncatedError):
            load_idx(images, labels)

    def test_short_payload_is_truncated(self, tmp_path):
        images = tmp_path / "img.idx"
        images.write_bytes(struct.pack(">4I", IDX_IMAGE_MAGIC, 2, 2, 2) + bytes(5))
        labels = write_labels(tmp_path / "lbl.idx", [0, 1])
        with pytest.raises(IdxTruncatedError):
            load_idx(images, labels)

    def test_bad_magic(self, tmp_path):
        images = write_images(tmp_path / "img.idx", [[1]], 1, 1, magic=0x0801)
        labels = write_labels(tmp_path / "lbl.idx", [0])
        with pytest.raises(IdxMagicError):
            load_idx(images, labels)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_idx(tmp_path / "nope", tmp_path / "nada")


# ─── Partitioning ────────────────────────────────────────────


class TestDirichletPartition:
    """Label-skewed splits across clients."""

    @pytest.fixture
    def labels(self) -> np.ndarray:
        return np.arange(1000) % 10

    def test_single_client_gets_everything(self, labels):
        shards = dirichlet_partition(labels, PartitionConfig(num_clients=1))
        assert shards == [list(range(1000))]

    def test_disjoint_and_covering(self, labels):
        for seed in range(5):
            shards = dirichlet_partition(labels, PartitionConfig(num_clients=7, seed=seed))
            merged = sorted(i for shard in shards for i in shard)
            assert merged == list(range(1000))
            assert all(shard == sorted(shard) for shard in shards)
            assert all(len(shard) >= 2 for shard in shards)

    def test_large_alpha_is_near_uniform(self):
        labels = np.arange(2000) % 4
        shards = dirichlet_partition(labels, PartitionConfig(num_clients=4, dirichlet_alpha=1e6, seed=0))
        for shard in shards:
            assert abs(len(shard) - 500) <= 0.05 * 500

    def test_deterministic(self, labels):
        cfg = PartitionConfig(num_clients=5, seed=3)
        assert dirichlet_partition(labels, cfg) == dirichlet_partition(labels, cfg)

    def test_smaller_alpha_means_lower_entropy(self, labels):
        def mean_entropy(alpha: float) -> float:
            values = []
            for seed in range(20):
                cfg = PartitionConfig(num_clients=5, dirichlet_alpha=alpha, seed=seed, min_per_client=1)
                for shard in dirichlet_partition(labels, cfg):
                    values.append(label_entropy(labels[shard], 10))
            return float(np.mean(values))

        assert mean_entropy(0.1) < mean_entropy(10.0)

    def test_infeasible_minimum(self):
        with pytest.raises(PartitionError):
            dirichlet_partition(np.zeros(5, dtype=np.int64), PartitionConfig(num_clients=3, min_per_client=2))

    def test_empty_labels(self):
        with pytest.raises(DataError):
            dirichlet_partition(np.array([], dtype=np.int64), PartitionConfig(num_clients=2))


class TestHoldoutAndEntropy:

    def test_holdout_split_sizes(self):
        train, hold = holdout_split(list(range(10)), 0.2, np.random.default_rng(0))
        assert len(hold) == 2 and len(train) == 8
        assert sorted(train + hold) == list(range(10))

    def test_holdout_keeps_one_training_sample(self):
        train, hold = holdout_split([4, 9], 0.9, np.random.default_rng(0))
        assert len(train) == 1 and len(hold) == 1

    def test_holdout_fraction_range(self):
        with pytest.raises(DataError):
            holdout_split([1, 2], 1.0, np.random.default_rng(0))

    def test_entropy(self):
        assert label_entropy(np.array([2, 2, 2]), 3) == 0.0
        assert label_entropy(np.array([0, 1]), 2) == pytest.approx(np.log(2.0))

"""
In-memory datasets and the synthetic Gaussian-cluster generator.
"""

from dataclasses import dataclass

import numpy as np

from src.shared.exceptions import DataError


@dataclass
class Dataset:
    """Feature matrix (n x d, float64) with integer class labels."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {self.features.shape}")
        if self.features.shape[0] != self.labels.shape[0]:
            raise DataError(
                f"{self.features.shape[0]} feature rows but {self.labels.shape[0]} labels"
            )
        if self.labels.size and self.labels.min() < 0:
            raise DataError("labels must be non-negative class ids")

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])

    @property
    def num_classes(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def subset(self, indices: list[int] | np.ndarray) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx])


def synth_classification(
    n: int, dim: int, classes: int, cluster_spread: float, seed: int,
    clusters_per_class: int = 1,
) -> Dataset:
    """
    Gaussian clusters, ``clusters_per_class`` means per class.

    Cluster means are standard-normal draws; samples are a mean of their
    class plus ``cluster_spread`` times standard-normal noise. With one
    cluster per class the classes are linearly separable as the spread goes
    to zero; more clusters make the class regions non-convex. Labels cycle
    through the classes before shuffling, so class counts differ by at most
    one.

    Raises:
        DataError: If n < classes or an argument is out of range.
    """
    if classes < 1 or dim < 1:
        raise DataError(f"classes and dim must be >= 1, got {classes}, {dim}")
    if n < classes:
        raise DataError(f"n={n} is smaller than the number of classes {classes}")
    if cluster_spread < 0:
        raise DataError(f"cluster_spread must be >= 0, got {cluster_spread}")
    if clusters_per_class < 1:
        raise DataError(f"clusters_per_class must be >= 1, got {clusters_per_class}")

    rng = np.random.default_rng(seed)
    means = rng.standard_normal((classes * clusters_per_class, dim))
    labels = rng.permutation(np.arange(n) % classes)
    centers = labels * clusters_per_class
    if clusters_per_class > 1:
        centers = centers + rng.integers(0, clusters_per_class, size=n)
    features = means[centers] + cluster_spread * rng.standard_normal((n, dim))
    return Dataset(features, labels)

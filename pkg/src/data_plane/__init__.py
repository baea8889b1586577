"""Synthetic data, IDX loading and Dirichlet non-IID partitioning."""

from .dataset import Dataset, synth_classification
from .idx import IDX_IMAGE_MAGIC, IDX_LABEL_MAGIC, load_idx
from .partition import (
    PartitionConfig,
    dirichlet_partition,
    holdout_split,
    label_entropy,
)

__all__ = [
    "Dataset",
    "IDX_IMAGE_MAGIC",
    "IDX_LABEL_MAGIC",
    "PartitionConfig",
    "dirichlet_partition",
    "holdout_split",
    "label_entropy",
    "load_idx",
    "synth_classification",
]

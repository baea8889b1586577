"""
Non-IID Dirichlet partitioning.

For every class a K-dimensional proportion vector is drawn from
Dirichlet(alpha, ..., alpha) and that class's (shuffled) indices are split
accordingly, with largest-remainder rounding so counts add up exactly.
Smaller alpha means stronger label skew.
"""

import numpy as np
from pydantic import BaseModel, Field, PositiveInt

from src.shared.exceptions import DataError, PartitionError
from src.shared.logging import setup_logging

logger = setup_logging("data_plane.partition", level="INFO")


class PartitionConfig(BaseModel):
    """Dirichlet split settings."""

    num_clients: PositiveInt = Field(description="K")
    dirichlet_alpha: float = Field(default=0.5, gt=0.0)
    seed: int = 0
    min_per_client: PositiveInt = 2
    max_retries: PositiveInt = 100

    model_config = {"extra": "forbid"}


def _split_once(
    labels: np.ndarray, num_clients: int, alpha: float, rng: np.random.Generator,
) -> list[list[int]]:
    shards: list[list[int]] = [[] for _ in range(num_clients)]
    for c in np.unique(labels):
        idx_c = np.flatnonzero(labels == c)
        rng.shuffle(idx_c)
        n_c = len(idx_c)
        proportions = rng.dirichlet([alpha] * num_clients)
        splits = np.floor(proportions * n_c).astype(int)

        remainder = n_c - int(splits.sum())
        if remainder > 0:
            frac = proportions * n_c - splits
            order = np.argsort(-frac, kind="stable")
            splits[order[:remainder]] += 1

        start = 0
        for k in range(num_clients):
            take = int(splits[k])
            shards[k].extend(idx_c[start:start + take].tolist())
            start += take
    return shards


def dirichlet_partition(labels: np.ndarray, cfg: PartitionConfig) -> list[list[int]]:
    """
    Split sample indices into K disjoint, covering, label-skewed shards.

    Resamples until every shard holds at least ``min_per_client`` indices,
    up to ``max_retries`` attempts.

    Returns:
        K index lists, each sorted ascending.

    Raises:
        DataError: If labels are empty.
        PartitionError: If min_per_client cannot be met.
    """
    labels = np.asarray(labels)
    if labels.size == 0:
        raise DataError("cannot partition an empty label set")
    k = cfg.num_clients
    if k * cfg.min_per_client > labels.size:
        raise PartitionError(
            f"{labels.size} samples cannot give {k} clients {cfg.min_per_client} each"
        )

    rng = np.random.default_rng(cfg.seed)
    if k == 1:
        return [list(range(labels.size))]

    for attempt in range(1, cfg.max_retries + 1):
        shards = _split_once(labels, k, cfg.dirichlet_alpha, rng)
        smallest = min(len(s) for s in shards)
        if smallest >= cfg.min_per_client:
            if attempt > 1:
                logger.info("Dirichlet partition satisfied min_per_client after %d attempts", attempt)
            return [sorted(s) for s in shards]
        logger.debug("Attempt %d: smallest shard has %d samples", attempt, smallest)

    raise PartitionError(
        f"no partition with >= {cfg.min_per_client} samples per client after "
        f"{cfg.max_retries} attempts (alpha={cfg.dirichlet_alpha}, K={k})"
    )


def holdout_split(
    indices: list[int], fraction: float, rng: np.random.Generator,
) -> tuple[list[int], list[int]]:
    """
    Split a shard into (train, holdout); the holdout takes ``fraction`` of it.

    At least one sample stays in train; the holdout has at least one sample
    whenever the shard has two or more.
    """
    if not 0.0 <= fraction < 1.0:
        raise DataError(f"holdout fraction must lie in [0, 1), got {fraction}")
    shuffled = np.asarray(indices, dtype=np.int64)[rng.permutation(len(indices))]
    n_hold = int(round(fraction * len(indices)))
    if fraction > 0.0 and len(indices) >= 2:
        n_hold = max(1, n_hold)
    n_hold = min(n_hold, len(indices) - 1)
    holdout = sorted(shuffled[:n_hold].tolist())
    train = sorted(shuffled[n_hold:].tolist())
    return train, holdout


def label_entropy(labels: np.ndarray, num_classes: int) -> float:
    """Shannon entropy (nats) of a shard's label distribution."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        return 0.0
    counts = np.bincount(labels, minlength=num_classes).astype(np.float64)
    p = counts[counts > 0] / labels.size
    return float(-np.sum(p * np.log(p)))

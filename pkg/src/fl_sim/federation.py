"""
Client data for one seeded run.

Builds the dataset, splits it across clients with a Dirichlet partition,
and holds out a fixed evaluation fraction of every client's shard.
"""

from dataclasses import dataclass, field

import numpy as np

from src.data_plane import (
    Dataset,
    dirichlet_partition,
    holdout_split,
    label_entropy,
    load_idx,
    synth_classification,
)
from src.fl_sim.config import ExperimentConfig
from src.hetero_agg import GroupSpec
from src.shared.exceptions import ExperimentError
from src.shared.logging import setup_logging

logger = setup_logging("fl_sim.federation", level="INFO")


@dataclass
class Federation:
    """Per-client train/holdout shards plus the shared evaluation batch."""

    train: dict[int, Dataset] = field(default_factory=dict)
    holdout: dict[int, Dataset] = field(default_factory=dict)
    client_group: dict[int, GroupSpec] = field(default_factory=dict)
    pooled_holdout: Dataset | None = None
    eval_batch: np.ndarray | None = None

    @property
    def client_ids(self) -> list[int]:
        return sorted(self.train)


def load_dataset(cfg: ExperimentConfig) -> Dataset:
    ds = cfg.dataset
    if ds.kind == "idx":
        dataset = load_idx(ds.images_path, ds.labels_path)
        if dataset.dim != cfg.model.input_dim:
            raise ExperimentError(
                f"IDX features have dim {dataset.dim}, model expects {cfg.model.input_dim}"
            )
        if dataset.num_classes > cfg.model.num_classes:
            raise ExperimentError(
                f"IDX labels span {dataset.num_classes} classes, model has {cfg.model.num_classes}"
            )
        return dataset
    return synth_classification(
        ds.n, ds.dim, ds.classes, ds.cluster_spread, ds.seed,
        clusters_per_class=ds.clusters_per_class,
    )


def build_federation(cfg: ExperimentConfig, seed: int) -> Federation:
    """
    Partition the dataset across the configured clients for ``seed``.

    The dataset itself is fixed by ``cfg.dataset.seed``; the partition,
    holdout split and evaluation batch vary with the run seed.
    """
    dataset = load_dataset(cfg)
    partition = cfg.partition.model_copy(update={"seed": seed})
    shards = dirichlet_partition(dataset.labels, partition)

    client_group = {cid: g for g in cfg.sorted_groups() for cid in g.client_ids}
    client_ids = sorted(client_group)

    fed = Federation(client_group=client_group)
    for cid, shard in zip(client_ids, shards):
        train_idx, hold_idx = holdout_split(
            shard, cfg.holdout_fraction, np.random.default_rng([seed, cid])
        )
        fed.train[cid] = dataset.subset(train_idx)
        fed.holdout[cid] = dataset.subset(hold_idx)
        logger.debug(
            "Client %d: %d train / %d holdout samples, label entropy %.3f",
            cid, len(train_idx), len(hold_idx),
            label_entropy(dataset.labels[shard], cfg.model.num_classes),
        )

    pooled = Dataset(
        np.concatenate([fed.holdout[cid].features for cid in client_ids]),
        np.concatenate([fed.holdout[cid].labels for cid in client_ids]),
    )
    fed.pooled_holdout = pooled
    if len(pooled) == 0:
        raise ExperimentError("no held-out samples available; raise holdout_fraction")
    pick = np.random.default_rng([seed]).permutation(len(pooled))[: cfg.eval_batch]
    fed.eval_batch = pooled.features[np.sort(pick)]
    return fed

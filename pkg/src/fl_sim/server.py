"""
Server side of one communication round.

FedAvgGroupwise averages deltas only inside each architecture group and
keeps one model per group. HeteroAvg averages every layer over the
clients that own it. InCo additionally replaces each deep layer's
aggregated delta with the cross-layer surgery of that delta against its
stage's aggregated anchor delta. Deltas already point downhill, so every
method applies ``w += g``.
"""

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from src.fl_sim.config import ExperimentConfig
from src.grad_surgery import GradientView, mix_cross_layer
from src.hetero_agg import AggregationPlan, GroupSpec, aggregate, build_plan, plan_for_group
from src.metrics import BetaStats, record_beta
from src.model_zoo import ModelWeights, init_model
from src.shared.exceptions import ZeroAnchorError
from src.shared.logging import setup_logging
from src.shared.models import LayerKey, layer_keys_for_depths
from src.tensor_core import Tensor

logger = setup_logging("fl_sim.server", level="INFO")

Deltas = Mapping[int, Mapping[LayerKey, Tensor]]


@dataclass
class ServerState:
    """Global weights (largest architecture) plus per-run bookkeeping.

    ``group_weights`` is only populated for FedAvgGroupwise, where each
    group keeps its own model. ``last_update`` holds the per-layer update
    applied in the most recent round.
    """

    global_weights: ModelWeights
    plan: AggregationPlan
    groups: list[GroupSpec]
    seed: int
    round: int = 0
    beta_stats: BetaStats = field(default_factory=BetaStats)
    group_weights: dict[int, ModelWeights] = field(default_factory=dict)
    group_plans: dict[int, AggregationPlan] = field(default_factory=dict)
    last_update: dict[LayerKey, Tensor] = field(default_factory=dict)

    @property
    def largest_group(self) -> GroupSpec:
        return self.groups[-1]

    def group_of(self, client_id: int) -> GroupSpec:
        for group in self.groups:
            if client_id in group.client_ids:
                return group
        raise KeyError(client_id)


def init_server_state(cfg: ExperimentConfig, seed: int) -> ServerState:
    """
    Build the round-0 server state for ``seed``.

    Every group-wise model is a slice of the same initialisation as the
    global model.
    """
    groups = cfg.sorted_groups()
    plan = build_plan(groups, int(cfg.model.stages))
    global_weights = init_model(cfg.model, groups[-1], seed)
    state = ServerState(global_weights=global_weights, plan=plan, groups=groups, seed=seed)
    if cfg.method == "fedavg_groupwise":
        for group in groups:
            keys = layer_keys_for_depths(list(group.depth_per_stage))
            state.group_weights[group.group_id] = global_weights.subset(keys)
            state.group_plans[group.group_id] = plan_for_group(
                groups, group.group_id, int(cfg.model.stages)
            )
    return state


def sample_clients(round_index: int, cfg: ExperimentConfig, rng: np.random.Generator) -> list[int]:
    """
    Uniform sample of ceil(K * sample_ratio) distinct clients, sorted by id.

    Pass a generator seeded from (seed, round) to make the sample depend on
    nothing else.
    """
    client_ids = sorted(cid for g in cfg.groups for cid in g.client_ids)
    picked = rng.choice(len(client_ids), size=cfg.sample_size, replace=False)
    sample = sorted(client_ids[int(i)] for i in picked)
    logger.debug("Round %d sampled clients %s", round_index, sample)
    return sample


def sampling_rng(seed: int, round_index: int) -> np.random.Generator:
    return np.random.default_rng([seed, round_index])


def distribute(state: ServerState, group: GroupSpec) -> ModelWeights:
    """A copy of exactly the layers ``group`` owns."""
    if state.group_weights:
        return state.group_weights[group.group_id].copy()
    keys = layer_keys_for_depths(list(group.depth_per_stage))
    return state.global_weights.subset(keys)


def _surgery(
    aggregated: dict[LayerKey, Tensor], cfg: ExperimentConfig, stats: BetaStats,
) -> dict[LayerKey, Tensor]:
    update = dict(aggregated)
    for key, delta in aggregated.items():
        if not key.is_deep or key.anchor not in aggregated:
            continue
        anchor = GradientView(key.anchor, aggregated[key.anchor])
        try:
            result = mix_cross_layer(anchor, GradientView(key, delta), cfg.surgery)
        except ZeroAnchorError:
            logger.warning("Zero anchor delta for %s; layer keeps its aggregated delta", key)
            continue
        update[key] = result.update
        if result.beta is not None:
            record_beta(stats, key, result.beta, result.theta)
    return update


def server_round(
    state: ServerState,
    deltas: Deltas,
    cfg: ExperimentConfig,
    sample_counts: Mapping[int, int] | None = None,
) -> ServerState:
    """
    Aggregate one round of client deltas and update the server weights.

    Args:
        state: Current server state; its BetaStats are updated in place.
        deltas: client_id -> layer -> delta, from sampled clients only.
        cfg: Experiment configuration (method and surgery variant).
        sample_counts: Client training-set sizes for weighted aggregation.

    Returns:
        The state for the next round.
    """
    if cfg.method == "fedavg_groupwise":
        group_weights = dict(state.group_weights)
        last_update: dict[LayerKey, Tensor] = {}
        for group in state.groups:
            contributions = {cid: d for cid, d in deltas.items() if cid in group.client_ids}
            if not contributions:
                continue
            update = aggregate(state.group_plans[group.group_id], contributions, sample_counts)
            group_weights[group.group_id] = group_weights[group.group_id].apply_delta(update)
            if group is state.largest_group:
                last_update = update
        largest = group_weights[state.largest_group.group_id]
        return ServerState(
            global_weights=largest,
            plan=state.plan,
            groups=state.groups,
            seed=state.seed,
            round=state.round + 1,
            beta_stats=state.beta_stats,
            group_weights=group_weights,
            group_plans=state.group_plans,
            last_update=last_update,
        )

    update = aggregate(state.plan, deltas, sample_counts)
    if cfg.method == "inco":
        update = _surgery(update, cfg, state.beta_stats)

    return ServerState(
        global_weights=state.global_weights.apply_delta(update),
        plan=state.plan,
        groups=state.groups,
        seed=state.seed,
        round=state.round + 1,
        beta_stats=state.beta_stats,
        last_update=update,
    )

"""
Heterogeneous layer-wise aggregation.

Each layer is averaged only over the clients whose architecture contains
it: w_l = sum over owning clients of w^k / (number of owning clients).
Summation runs sequentially in plan order (clients sorted by id), so the
result is bit-identical for any ordering of the contribution map.
"""

from typing import Mapping

import numpy as np

from src.hetero_agg.models import AggregationPlan, GroupSpec
from src.shared.exceptions import (
    AggregationError,
    MissingContributionError,
    NonNestedGroupsError,
    ShapeMismatchError,
)
from src.shared.logging import setup_logging
from src.shared.models import LayerKey, layer_keys_for_depths
from src.tensor_core import Tensor

logger = setup_logging("hetero_agg.aggregator", level="INFO")


def _validate_groups(groups: list[GroupSpec], stages: int) -> list[GroupSpec]:
    ordered = sorted(groups, key=lambda g: g.group_id)
    if not ordered:
        raise AggregationError("at least one group is required")
    ids = [g.group_id for g in ordered]
    if len(set(ids)) != len(ids):
        raise AggregationError(f"duplicate group ids: {ids}")

    seen_clients: set[int] = set()
    for g in ordered:
        if g.stages != stages:
            raise AggregationError(
                f"group {g.group_id} has {g.stages} stages, expected {stages}"
            )
        if not g.client_ids:
            raise AggregationError(f"group {g.group_id} has no clients")
        overlap = seen_clients.intersection(g.client_ids)
        if overlap or len(set(g.client_ids)) != len(g.client_ids):
            raise AggregationError(
                f"group {g.group_id} repeats client ids {sorted(overlap) or g.client_ids}"
            )
        seen_clients.update(g.client_ids)

    for smaller, larger in zip(ordered, ordered[1:]):
        for s in range(stages):
            if smaller.depth_per_stage[s] > larger.depth_per_stage[s]:
                raise NonNestedGroupsError(
                    f"group {smaller.group_id} is deeper than group {larger.group_id} "
                    f"in stage {s} ({smaller.depth_per_stage[s]} > {larger.depth_per_stage[s]})"
                )
    return ordered


def build_plan(groups: list[GroupSpec], stages: int) -> AggregationPlan:
    """
    Build the per-layer contributor lists for nested architecture groups.

    Args:
        groups: Group specs; any order, validated for nesting and disjointness.
        stages: Number of stages every group must have.

    Returns:
        An AggregationPlan covering every layer of the largest group, keys in
        forward order, contributors sorted by client id.

    Raises:
        NonNestedGroupsError: If a smaller group is deeper in some stage.
        AggregationError: For duplicate ids, empty or overlapping groups.
    """
    ordered = _validate_groups(groups, stages)
    largest = ordered[-1]

    plan = AggregationPlan()
    for key in layer_keys_for_depths(list(largest.depth_per_stage)):
        contributors = [
            (cid, g.group_id)
            for g in ordered if g.owns(key)
            for cid in g.client_ids
        ]
        plan.contributors[key] = sorted(contributors)

    logger.debug(
        "Built plan over %d layers for %d groups", len(plan.contributors), len(ordered)
    )
    return plan


def plan_for_group(groups: list[GroupSpec], group_id: int, stages: int) -> AggregationPlan:
    """A plan restricted to a single group (group-wise FedAvg)."""
    for g in groups:
        if g.group_id == group_id:
            return build_plan([g], stages)
    raise AggregationError(f"unknown group id {group_id}")


def aggregate(
    plan: AggregationPlan,
    contributions: Mapping[int, Mapping[LayerKey, Tensor]],
    sample_counts: Mapping[int, int] | None = None,
) -> dict[LayerKey, Tensor]:
    """
    Average each planned layer over the participating clients that own it.

    Clients absent from ``contributions`` did not participate this round and
    are left out of both the sum and the count. A layer with no
    participating owner is omitted from the result (its weights stay
    unchanged) and logged as skipped.

    Args:
        plan: Contributor lists from ``build_plan``.
        contributions: client_id -> layer -> tensor.
        sample_counts: Optional client_id -> number of samples; switches to
            the dataset-size-weighted mean.

    Returns:
        layer -> aggregated tensor, in plan order.

    Raises:
        MissingContributionError: If a participating client lacks a planned layer.
        ShapeMismatchError: If contributors disagree on a layer's shape.
        AggregationError: If a contribution comes from a client outside the plan.
    """
    unknown = set(contributions) - plan.client_ids()
    if unknown:
        raise AggregationError(f"contributions from clients outside the plan: {sorted(unknown)}")

    result: dict[LayerKey, Tensor] = {}
    skipped: list[LayerKey] = []
    for key, contributors in plan.contributors.items():
        present = [cid for cid, _ in contributors if cid in contributions]
        if not present:
            skipped.append(key)
            continue

        total: Tensor | None = None
        denominator = 0.0
        for cid in present:
            layer_map = contributions[cid]
            if key not in layer_map:
                raise MissingContributionError(
                    f"client {cid} did not supply layer {key}"
                )
            tensor = np.asarray(layer_map[key], dtype=np.float64)
            if total is None:
                total = np.zeros_like(tensor)
            elif tensor.shape != total.shape:
                raise ShapeMismatchError(
                    f"client {cid} sent layer {key} with shape {tensor.shape}, "
                    f"expected {total.shape}"
                )
            if sample_counts is None:
                total = total + tensor
                denominator += 1.0
            else:
                weight = float(sample_counts[cid])
                total = total + weight * tensor
                denominator += weight

        if denominator <= 0.0:
            raise AggregationError(f"layer {key} has zero total weight")
        result[key] = total / denominator

    if skipped:
        logger.info("Skipped %d layer(s) without contributors: %s", len(skipped), [str(k) for k in skipped])
    return result

"""
Architecture groups and aggregation plans.

Groups are ordered by model size and nested by depth: a client of a
smaller group owns a prefix of the layers of every larger group, stage by
stage. The plan lists, per layer, the clients whose architecture contains
that layer.
"""

from dataclasses import dataclass, field

from pydantic import BaseModel, Field, PositiveInt

from src.shared.models import LayerKey


class GroupSpec(BaseModel):
    """One architecture group: a depth per stage and the clients using it."""

    group_id: PositiveInt = Field(description="1..n, ordered by model size")
    depth_per_stage: list[PositiveInt] = Field(min_length=1)
    client_ids: list[int] = Field(
        default_factory=list,
        description="Client identifiers; assigned from `size` when empty",
    )
    size: PositiveInt | None = Field(
        default=None,
        description="Number of clients, used when client_ids is left empty",
    )

    model_config = {"extra": "forbid"}

    @property
    def stages(self) -> int:
        return len(self.depth_per_stage)

    def owns(self, key: LayerKey) -> bool:
        """Whether this group's architecture contains ``key``."""
        if not key.is_block:
            return True
        return key.stage < self.stages and key.index_in_stage < self.depth_per_stage[key.stage]


@dataclass
class AggregationPlan:
    """Per-layer ordered contributor lists of (client_id, group_id)."""

    contributors: dict[LayerKey, list[tuple[int, int]]] = field(default_factory=dict)

    @property
    def layers(self) -> list[LayerKey]:
        return list(self.contributors)

    def contributor_count(self, key: LayerKey) -> int:
        return len(self.contributors.get(key, []))

    def client_ids(self) -> set[int]:
        return {cid for contribs in self.contributors.values() for cid, _ in contribs}

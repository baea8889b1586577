"""
Layer addressing shared by every component.

A LayerKey names one parameter-bearing layer of a StageNet model. Square
intra-stage layers are BLOCK keys indexed within their stage; index 0 of
each stage is the anchor ("Layer 0") whose gradient is mixed into the
deeper layers of the same stage.
"""

from dataclasses import dataclass
from enum import IntEnum


class LayerKind(IntEnum):
    """Kind of layer. The integer order is the forward order within a stage."""

    PROJECTION = 0
    BLOCK = 1
    CLASSIFIER = 2


@dataclass(frozen=True, order=True)
class LayerKey:
    """Address of one layer: (stage, index within stage, kind).

    Ordering follows the forward pass: within a stage the projection
    comes first, then blocks by index; the classifier is keyed with
    ``stage == number of stages`` so it sorts last.
    """

    stage: int
    index_in_stage: int = 0
    kind: LayerKind = LayerKind.BLOCK

    def __post_init__(self) -> None:
        if self.stage < 0 or self.index_in_stage < 0:
            raise ValueError(f"LayerKey indices must be >= 0, got {self.stage}, {self.index_in_stage}")

    @classmethod
    def block(cls, stage: int, index: int) -> "LayerKey":
        return cls(stage, index, LayerKind.BLOCK)

    @classmethod
    def projection(cls, stage: int) -> "LayerKey":
        return cls(stage, 0, LayerKind.PROJECTION)

    @classmethod
    def classifier(cls, stages: int) -> "LayerKey":
        return cls(stages, 0, LayerKind.CLASSIFIER)

    @property
    def is_block(self) -> bool:
        return self.kind is LayerKind.BLOCK

    @property
    def is_anchor(self) -> bool:
        """True for the stage's Layer 0."""
        return self.is_block and self.index_in_stage == 0

    @property
    def is_deep(self) -> bool:
        """True for blocks that receive cross-layer gradients."""
        return self.is_block and self.index_in_stage >= 1

    @property
    def anchor(self) -> "LayerKey":
        """The Layer 0 key of this layer's stage."""
        return LayerKey.block(self.stage, 0)

    @property
    def label(self) -> str:
        if self.kind is LayerKind.PROJECTION:
            return f"s{self.stage}.proj"
        if self.kind is LayerKind.CLASSIFIER:
            return "classifier"
        return f"s{self.stage}.block{self.index_in_stage}"

    def __str__(self) -> str:
        return self.label


def layer_keys_for_depths(depth_per_stage: list[int]) -> list[LayerKey]:
    """All layer keys of a model with the given per-stage depths, in forward order."""
    keys: list[LayerKey] = []
    for stage, depth in enumerate(depth_per_stage):
        keys.append(LayerKey.projection(stage))
        keys.extend(LayerKey.block(stage, i) for i in range(depth))
    keys.append(LayerKey.classifier(len(depth_per_stage)))
    return keys

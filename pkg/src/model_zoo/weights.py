"""
Model weights container.

Each layer's parameters are stored as one packed tensor of shape
(fan_in + 1, fan_out): the weight matrix with the bias appended as the
last row. Aggregation and surgery therefore see one matrix per layer.
"""

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from src.model_zoo.config import StageNetConfig
from src.shared.exceptions import ModelError, ShapeMismatchError
from src.shared.models import LayerKey, LayerKind
from src.tensor_core import Tensor


def layer_shape(cfg: StageNetConfig, key: LayerKey) -> tuple[int, int]:
    """Packed parameter shape (fan_in + 1, fan_out) of ``key`` under ``cfg``."""
    widths = cfg.stage_widths
    if key.kind is LayerKind.CLASSIFIER:
        return widths[-1] + 1, cfg.num_classes
    if key.stage >= len(widths):
        raise ModelError(f"layer {key} lies outside the {len(widths)} configured stages")
    if key.kind is LayerKind.PROJECTION:
        fan_in = cfg.input_dim if key.stage == 0 else widths[key.stage - 1]
        return fan_in + 1, widths[key.stage]
    return widths[key.stage] + 1, widths[key.stage]


@dataclass
class ModelWeights:
    """Ordered layer -> packed parameter tensor, plus the config it belongs to."""

    config: StageNetConfig
    layers: dict[LayerKey, Tensor] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.layers = dict(sorted(self.layers.items()))

    # ─── Views ─────────────────────────────────────────────

    def keys(self) -> list[LayerKey]:
        return list(self.layers)

    def weight(self, key: LayerKey) -> Tensor:
        return self.layers[key][:-1]

    def bias(self, key: LayerKey) -> Tensor:
        return self.layers[key][-1]

    def depth_per_stage(self) -> list[int]:
        depths = [0] * int(self.config.stages)
        for key in self.layers:
            if key.is_block:
                depths[key.stage] += 1
        return depths

    def block_keys(self, stage: int) -> list[LayerKey]:
        return [k for k in self.layers if k.is_block and k.stage == stage]

    # ─── Copies and updates ────────────────────────────────

    def copy(self) -> "ModelWeights":
        return ModelWeights(self.config, {k: np.array(v) for k, v in self.layers.items()})

    def subset(self, keys: Iterable[LayerKey]) -> "ModelWeights":
        """Copy of the given layers; every key must be present."""
        out: dict[LayerKey, Tensor] = {}
        for key in keys:
            if key not in self.layers:
                raise ModelError(f"layer {key} is not part of these weights")
            out[key] = np.array(self.layers[key])
        return ModelWeights(self.config, out)

    def apply_delta(self, delta: Mapping[LayerKey, Tensor]) -> "ModelWeights":
        """New weights with ``w + delta`` on every layer present in ``delta``."""
        out = dict(self.layers)
        for key, d in delta.items():
            if key not in out:
                raise ModelError(f"delta targets unknown layer {key}")
            if d.shape != out[key].shape:
                raise ShapeMismatchError(
                    f"delta for {key} has shape {d.shape}, expected {out[key].shape}"
                )
            out[key] = out[key] + d
        return ModelWeights(self.config, out)

    def difference(self, other: "ModelWeights") -> dict[LayerKey, Tensor]:
        """Per-layer ``self - other`` over this model's layers."""
        return {k: v - other.layers[k] for k, v in self.layers.items()}

    # ─── Flat views (used by the convergence estimators) ──

    def layer_slices(self) -> dict[LayerKey, slice]:
        slices: dict[LayerKey, slice] = {}
        offset = 0
        for key, tensor in self.layers.items():
            slices[key] = slice(offset, offset + tensor.size)
            offset += tensor.size
        return slices

    def flatten(self) -> Tensor:
        if not self.layers:
            return np.zeros(0)
        return np.concatenate([t.ravel() for t in self.layers.values()])

    def from_flat(self, flat: Tensor) -> "ModelWeights":
        """Weights with this model's layout filled from ``flat``."""
        slices = self.layer_slices()
        total = sum(t.size for t in self.layers.values())
        if flat.shape != (total,):
            raise ShapeMismatchError(f"flat vector has shape {flat.shape}, expected ({total},)")
        return ModelWeights(
            self.config,
            {k: np.array(flat[slices[k]]).reshape(t.shape) for k, t in self.layers.items()},
        )

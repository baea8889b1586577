"""
Cross-layer surgery data types.

GradientView pairs a layer address with its gradient (or delta) tensor.
ProjectionOutcome carries the halfspace-projection coefficients, and
SurgeryConfig selects the ablation variant.
"""

from dataclasses import dataclass
from enum import Enum

from pydantic import BaseModel, Field

from src.shared.models import LayerKey
from src.tensor_core import Tensor


@dataclass(frozen=True)
class GradientView:
    """One layer's gradient or delta."""

    layer: LayerKey
    tensor: Tensor


class Branch(str, Enum):
    """Which side of the halfspace test the projection took."""

    IDENTITY = "identity"
    CORRECTED = "corrected"


@dataclass(frozen=True)
class ProjectionOutcome:
    """Result of projecting gk onto the halfspace <x, g0> >= 0.

    alpha = <g0, g0>, beta = <gk, g0>, theta = beta / alpha.
    """

    g_opt: Tensor
    theta: float
    alpha: float
    beta: float
    branch: Branch


@dataclass(frozen=True)
class SurgeryResult:
    """An update produced by ``mix_cross_layer`` plus the coefficients behind it.

    ``alpha``/``beta``/``theta`` are computed on the same pair the update
    used (unit gradients when normalizing). They are None when the anchor
    is all-zero. ``branch`` names the operation applied to the deep
    gradient: IDENTITY leaves it unchanged, CORRECTED subtracts theta*g0.
    """

    update: Tensor
    alpha: float | None
    beta: float | None
    theta: float | None
    branch: Branch | None


class SurgeryConfig(BaseModel):
    """Ablation axes of cross-layer gradient surgery."""

    normalize: bool = Field(default=True, description="Normalize g0 and gk before mixing")
    optimize: bool = Field(default=True, description="Apply the halfspace projection")
    always_subtract: bool = Field(
        default=True,
        description="Apply gk - theta*g0 even when beta >= 0",
    )
    epsilon_norm: float = Field(
        default=1e-12, gt=0.0, description="Guard for zero-norm gradients"
    )

    model_config = {"extra": "forbid"}

    @property
    def variant_label(self) -> str:
        if self.normalize and self.optimize:
            return "inco"
        if self.optimize:
            return "inco_wo_norm"
        if self.normalize:
            return "inco_wo_opt"
        return "inco_wo_norm_opt"

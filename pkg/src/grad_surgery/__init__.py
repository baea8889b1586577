"""Cross-layer gradient mixing, normalization and halfspace projection."""

from .models import (
    Branch,
    GradientView,
    ProjectionOutcome,
    SurgeryConfig,
    SurgeryResult,
)
from .surgery import (
    cross_layer_sum,
    inco_update,
    mix_cross_layer,
    normalize_pair,
    project_halfspace,
)

__all__ = [
    "Branch",
    "GradientView",
    "ProjectionOutcome",
    "SurgeryConfig",
    "SurgeryResult",
    "cross_layer_sum",
    "inco_update",
    "mix_cross_layer",
    "normalize_pair",
    "project_halfspace",
]

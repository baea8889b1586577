"""CKA similarity, accuracy, beta/theta statistics and gradient histograms."""

from .cka import CkaMatrix, linear_cka, pairwise_stage_cka
from .stats import (
    BetaStats,
    LayerBetaCounter,
    accuracy,
    gradient_histogram,
    record_beta,
)

__all__ = [
    "BetaStats",
    "CkaMatrix",
    "LayerBetaCounter",
    "accuracy",
    "gradient_histogram",
    "linear_cka",
    "pairwise_stage_cka",
    "record_beta",
]

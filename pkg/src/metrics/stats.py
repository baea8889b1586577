"""
Beta/theta statistics, gradient histograms and accuracy.
"""

from dataclasses import dataclass, field

import numpy as np

from src.shared.exceptions import MetricsError
from src.shared.models import LayerKey
from src.tensor_core import Tensor


@dataclass
class LayerBetaCounter:
    count_total: int = 0
    count_positive: int = 0
    theta_sum: float = 0.0
    theta_count: int = 0

    @property
    def positive_rate(self) -> float | None:
        if self.count_total == 0:
            return None
        return self.count_positive / self.count_total

    @property
    def mean_theta(self) -> float | None:
        if self.theta_count == 0:
            return None
        return self.theta_sum / self.theta_count


@dataclass
class BetaStats:
    """Per-layer counts of beta > 0 over a run."""

    layers: dict[LayerKey, LayerBetaCounter] = field(default_factory=dict)

    def positive_rate(self, layer: LayerKey) -> float | None:
        counter = self.layers.get(layer)
        return counter.positive_rate if counter else None

    def mean_theta(self, layer: LayerKey) -> float | None:
        counter = self.layers.get(layer)
        return counter.mean_theta if counter else None


def record_beta(
    stats: BetaStats, layer: LayerKey, beta: float, theta: float | None = None,
) -> BetaStats:
    """Count one beta observation (positive means beta > 0 strictly)."""
    counter = stats.layers.setdefault(layer, LayerBetaCounter())
    counter.count_total += 1
    if beta > 0.0:
        counter.count_positive += 1
    if theta is not None:
        counter.theta_sum += theta
        counter.theta_count += 1
    return stats


def gradient_histogram(g: Tensor, bins: int, value_range: tuple[float, float]) -> list[int]:
    """
    Histogram of tensor values with overflow buckets.

    Returns:
        [below lo, bin_0, ..., bin_{bins-1}, above hi]; ``hi`` itself falls
        in the last regular bin.
    """
    lo, hi = value_range
    if bins < 1:
        raise MetricsError(f"bins must be >= 1, got {bins}")
    if not lo < hi:
        raise MetricsError(f"histogram range needs lo < hi, got ({lo}, {hi})")
    values = np.asarray(g, dtype=np.float64).ravel()
    counts, _ = np.histogram(values[(values >= lo) & (values <= hi)], bins=bins, range=(lo, hi))
    under = int(np.count_nonzero(values < lo))
    over = int(np.count_nonzero(values > hi))
    return [under, *(int(c) for c in counts), over]


def accuracy(logits: Tensor, labels: np.ndarray) -> float:
    """Fraction of argmax matches; ties go to the lowest class index."""
    logits = np.asarray(logits)
    labels = np.asarray(labels)
    if logits.ndim != 2 or logits.shape[0] != labels.shape[0]:
        raise MetricsError(f"logits {logits.shape} do not match {labels.shape[0]} labels")
    if labels.size == 0:
        return 0.0
    return float(np.mean(np.argmax(logits, axis=1) == labels))

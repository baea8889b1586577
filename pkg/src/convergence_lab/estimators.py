"""
Empirical estimates of the convergence constants.

Estimates are plug-in values measured at one point of parameter space,
not certified bounds:

- L: largest ||grad(x) - grad(y)|| / ||x - y|| over random probe pairs,
  each refined by power iteration on gradient differences.
- sigma²: largest per-layer mean squared deviation of minibatch gradients
  from the full-shard gradient.
- rho: largest minibatch gradient norm.
- Gamma: largest covariance, across minibatches, of the gradient norms of
  two layers in the same stage.

Minibatches are contiguous, disjoint slices of the sample order.
"""

import math
from itertools import combinations
from typing import Protocol

import numpy as np

from src.convergence_lab.bounds import eta_bound_monotone
from src.convergence_lab.models import ConvergenceConstants, EtaBound
from src.model_zoo import ModelWeights, TrainerConfig, backward, cross_entropy, forward
from src.model_zoo.trainer import Shard
from src.shared.exceptions import ConvergenceError, InsufficientDataError
from src.shared.logging import setup_logging
from src.tensor_core import Tensor, norm

logger = setup_logging("convergence_lab.estimators", level="INFO")


class Objective(Protocol):
    """A differentiable loss over a flat parameter vector and a sample set."""

    @property
    def num_samples(self) -> int: ...

    def params(self) -> Tensor: ...

    def layer_slices(self) -> dict[str, slice]: ...

    def intra_stage_pairs(self) -> list[tuple[str, str]]: ...

    def loss(self, flat: Tensor, indices: np.ndarray | None = None) -> float: ...

    def gradient(self, flat: Tensor, indices: np.ndarray | None = None) -> Tensor: ...


class StageNetObjective:
    """Mean cross-entropy of a StageNet model on a shard."""

    def __init__(self, weights: ModelWeights, features: np.ndarray, labels: np.ndarray) -> None:
        self._weights = weights
        self._features = np.asarray(features, dtype=np.float64)
        self._labels = np.asarray(labels, dtype=np.int64)

    @property
    def num_samples(self) -> int:
        return int(self._labels.shape[0])

    def params(self) -> Tensor:
        return self._weights.flatten()

    def layer_slices(self) -> dict[str, slice]:
        return {str(k): s for k, s in self._weights.layer_slices().items()}

    def intra_stage_pairs(self) -> list[tuple[str, str]]:
        pairs: list[tuple[str, str]] = []
        for stage in range(int(self._weights.config.stages)):
            blocks = [str(k) for k in self._weights.block_keys(stage)]
            pairs.extend(combinations(blocks, 2))
        return pairs

    def _batch(self, indices: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
        if indices is None:
            return self._features, self._labels
        return self._features[indices], self._labels[indices]

    def loss(self, flat: Tensor, indices: np.ndarray | None = None) -> float:
        x, y = self._batch(indices)
        logits, _, _ = forward(self._weights.from_flat(flat), x)
        return cross_entropy(logits, y)

    def gradient(self, flat: Tensor, indices: np.ndarray | None = None) -> Tensor:
        x, y = self._batch(indices)
        w = self._weights.from_flat(flat)
        _, _, cache = forward(w, x)
        grads = backward(cache, y)
        return np.concatenate([grads[k].tensor.ravel() for k in w.keys()])


class LeastSquaresObjective:
    """
    Linear model with squared loss, 0.5 * ||X w - y||².

    Minibatch losses are rescaled by n / |batch| so they estimate the
    full-sample loss; the full-sample Hessian is exactly XᵀX.
    """

    def __init__(self, design: np.ndarray, targets: np.ndarray, w0: np.ndarray | None = None) -> None:
        self._x = np.asarray(design, dtype=np.float64)
        self._y = np.asarray(targets, dtype=np.float64)
        if self._x.ndim != 2 or self._x.shape[0] != self._y.shape[0]:
            raise ConvergenceError(
                f"design {self._x.shape} does not match {self._y.shape[0]} targets"
            )
        self._w0 = np.zeros(self._x.shape[1]) if w0 is None else np.asarray(w0, dtype=np.float64)

    @property
    def num_samples(self) -> int:
        return int(self._x.shape[0])

    def params(self) -> Tensor:
        return np.array(self._w0)

    def layer_slices(self) -> dict[str, slice]:
        return {"linear": slice(0, self._x.shape[1])}

    def intra_stage_pairs(self) -> list[tuple[str, str]]:
        return []

    def _batch(self, indices: np.ndarray | None) -> tuple[np.ndarray, np.ndarray, float]:
        if indices is None:
            return self._x, self._y, 1.0
        return self._x[indices], self._y[indices], self.num_samples / len(indices)

    def loss(self, flat: Tensor, indices: np.ndarray | None = None) -> float:
        x, y, scale = self._batch(indices)
        residual = x @ flat - y
        return float(0.5 * scale * residual @ residual)

    def gradient(self, flat: Tensor, indices: np.ndarray | None = None) -> Tensor:
        x, y, scale = self._batch(indices)
        return scale * (x.T @ (x @ flat - y))


# ─── Estimation ────────────────────────────────────────────


def _minibatches(n: int, batch_size: int) -> list[np.ndarray]:
    if batch_size >= n:
        return [np.arange(n)]
    return [np.arange(start, start + batch_size) for start in range(0, n - batch_size + 1, batch_size)]


def _smoothness_probe(
    objective: Objective, rng: np.random.Generator, power_iterations: int,
) -> float:
    base = objective.params()
    radius = 1e-2 * max(1.0, norm(base) / math.sqrt(max(base.size, 1)))
    point = base + radius * rng.standard_normal(base.size)
    direction = rng.standard_normal(base.size)
    direction /= max(norm(direction), 1e-300)

    g_point = objective.gradient(point)
    ratio = 0.0
    for _ in range(max(power_iterations, 1)):
        diff = objective.gradient(point + radius * direction) - g_point
        diff_norm = norm(diff)
        ratio = diff_norm / radius
        if diff_norm == 0.0:
            break
        direction = diff / diff_norm
    return ratio


def estimate_constants(
    objective: Objective,
    probes: int,
    seed: int,
    batch_size: int | None = None,
    power_iterations: int = 20,
) -> ConvergenceConstants:
    """
    Measure L, sigma², rho and Gamma for ``objective`` at its current parameters.

    Args:
        objective: The loss to probe.
        probes: Number of random probes for the smoothness estimate.
        seed: Seed of the probe directions.
        batch_size: Minibatch size; defaults to half the samples. A size of
            at least the sample count gives one full batch (sigma² = 0).
        power_iterations: Refinement steps per smoothness probe.

    Returns:
        Constants with the estimated fields set; E, eta, kappa and epsilon
        keep their defaults.

    Raises:
        InsufficientDataError: If fewer than two samples are available.
    """
    n = objective.num_samples
    if n < 2:
        raise InsufficientDataError(f"need at least 2 samples to estimate constants, got {n}")
    if probes < 1:
        raise ConvergenceError(f"probes must be >= 1, got {probes}")
    size = batch_size if batch_size is not None else n // 2
    if size < 1:
        raise InsufficientDataError(f"batch size must be >= 1, got {size}")

    rng = np.random.default_rng(seed)
    l_hat = max(_smoothness_probe(objective, rng, power_iterations) for _ in range(probes))

    params = objective.params()
    full = objective.gradient(params)
    batches = _minibatches(n, size)
    grads = [objective.gradient(params, idx) for idx in batches]
    slices = objective.layer_slices()

    sigma2 = 0.0
    for sl in slices.values():
        deviations = [float(np.sum((g[sl] - full[sl]) ** 2)) for g in grads]
        sigma2 = max(sigma2, float(np.mean(deviations)))
    rho = max(norm(g) for g in grads)

    gamma = 0.0
    if len(grads) >= 2:
        for a, b in objective.intra_stage_pairs():
            norms_a = np.array([norm(g[slices[a]]) for g in grads])
            norms_b = np.array([norm(g[slices[b]]) for g in grads])
            gamma = max(gamma, float(np.cov(norms_a, norms_b)[0, 1]))

    logger.debug(
        "Estimated L=%.4g sigma2=%.4g rho=%.4g gamma=%.4g over %d batch(es)",
        l_hat, sigma2, rho, gamma, len(batches),
    )
    return ConvergenceConstants(L=l_hat, sigma2=sigma2, rho=rho, gamma=gamma)


def gradient_descent_trace(objective: Objective, eta: float, steps: int) -> list[float]:
    """Full-batch gradient descent losses: the initial loss plus one per step."""
    x = objective.params()
    losses = [objective.loss(x)]
    for _ in range(steps):
        x = x - eta * objective.gradient(x)
        losses.append(objective.loss(x))
    return losses


def eta_bound_diagnostic(
    weights: ModelWeights,
    shard: Shard,
    tcfg: TrainerConfig,
    probes: int,
    seed: int,
) -> EtaBound:
    """
    Step-size bound for one round, from constants estimated at ``weights``.

    E is the number of local optimizer steps of a client holding these
    samples, and S approximates the round's squared-gradient sum as
    E * ||full gradient||².
    """
    objective = StageNetObjective(weights, shard.features, shard.labels)
    constants = estimate_constants(objective, probes, seed, batch_size=tcfg.batch_size)
    steps = tcfg.local_epochs * math.ceil(objective.num_samples / tcfg.batch_size)
    constants = constants.model_copy(update={"E": steps, "eta": tcfg.learning_rate})
    full = objective.gradient(objective.params())
    s = steps * float(full @ full)
    return eta_bound_monotone(constants, s)

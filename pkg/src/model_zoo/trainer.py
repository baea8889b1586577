"""
Client-side local training.

Runs E epochs of shuffled minibatch updates with SGD or Adam, optionally
with the FedProx proximal term (mu/2)||w - w_global||², whose gradient
mu (w - w_global) is added to every layer gradient. Optimizer state is
created fresh for each call; clients are stateless between rounds.
"""

from typing import Protocol

import numpy as np

from src.model_zoo.config import TrainerConfig
from src.model_zoo.stagenet import backward, forward
from src.model_zoo.weights import ModelWeights
from src.shared.exceptions import EmptyShardError, ModelError
from src.shared.models import LayerKey
from src.tensor_core import Tensor


class Shard(Protocol):
    features: np.ndarray
    labels: np.ndarray


class SGDOptimizer:
    """Plain SGD: update = -eta * g."""

    def __init__(self, learning_rate: float) -> None:
        self._lr = learning_rate

    def update(self, key: LayerKey, grad: Tensor) -> Tensor:
        return -self._lr * grad

    def tick(self) -> None:
        pass


class AdamOptimizer:
    """Adam with bias correction; one moment pair per layer."""

    def __init__(self, learning_rate: float, beta1: float, beta2: float, eps: float) -> None:
        self._lr = learning_rate
        self._beta1 = beta1
        self._beta2 = beta2
        self._eps = eps
        self._step = 0
        self._m: dict[LayerKey, Tensor] = {}
        self._v: dict[LayerKey, Tensor] = {}

    def tick(self) -> None:
        self._step += 1

    def update(self, key: LayerKey, grad: Tensor) -> Tensor:
        m = self._m.get(key, np.zeros_like(grad))
        v = self._v.get(key, np.zeros_like(grad))
        m = self._beta1 * m + (1.0 - self._beta1) * grad
        v = self._beta2 * v + (1.0 - self._beta2) * grad * grad
        self._m[key] = m
        self._v[key] = v
        m_hat = m / (1.0 - self._beta1 ** self._step)
        v_hat = v / (1.0 - self._beta2 ** self._step)
        return -self._lr * m_hat / (np.sqrt(v_hat) + self._eps)


def make_optimizer(tcfg: TrainerConfig) -> SGDOptimizer | AdamOptimizer:
    if tcfg.optimizer == "sgd":
        return SGDOptimizer(tcfg.learning_rate)
    return AdamOptimizer(tcfg.learning_rate, tcfg.adam_beta1, tcfg.adam_beta2, tcfg.adam_eps)


def local_train(
    w: ModelWeights,
    shard: Shard,
    tcfg: TrainerConfig,
    global_w: ModelWeights | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[ModelWeights, dict[LayerKey, Tensor]]:
    """
    Train a client model on its shard.

    The update is accumulated as a delta and the new weights are
    materialised as ``w + delta``, so ``w_new == w + delta`` holds exactly.

    Args:
        w: Weights received from the server.
        shard: Client data (features, labels).
        tcfg: Optimizer settings.
        global_w: Anchor for the proximal term; defaults to ``w``.
        rng: Minibatch shuffling stream; defaults to one seeded by ``tcfg.seed``.

    Returns:
        (w_new, delta) with delta = w_new - w per layer.

    Raises:
        EmptyShardError: If the shard has no samples.
    """
    n = len(shard.labels)
    if n == 0:
        raise EmptyShardError("local_train called with an empty shard")
    if rng is None:
        rng = np.random.default_rng(tcfg.seed)

    mu = tcfg.prox_mu
    anchor = global_w if global_w is not None else w
    if mu > 0.0:
        missing = [k for k in w.layers if k not in anchor.layers]
        if missing:
            raise ModelError(f"proximal anchor lacks layers {[str(k) for k in missing]}")

    optimizer = make_optimizer(tcfg)
    delta = {k: np.zeros_like(v) for k, v in w.layers.items()}
    current = w.copy()

    for _ in range(tcfg.local_epochs):
        order = rng.permutation(n)
        for start in range(0, n, tcfg.batch_size):
            idx = order[start:start + tcfg.batch_size]
            _, _, cache = forward(current, shard.features[idx])
            grads = backward(cache, shard.labels[idx])
            optimizer.tick()
            for key, view in grads.items():
                g = view.tensor
                if mu > 0.0:
                    g = g + mu * (current.layers[key] - anchor.layers[key])
                delta[key] = delta[key] + optimizer.update(key, g)
            current = w.apply_delta(delta)

    return current, delta

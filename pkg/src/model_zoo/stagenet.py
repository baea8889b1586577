"""
StageNet: a staged MLP with manual forward and backward passes.

Layout per stage s: a rectangular projection into width_s followed by
``depth_per_stage[s]`` square blocks; a linear classifier closes the
network. Every layer except the classifier is followed by the configured
activation. The loss is mean softmax cross-entropy.
"""

from dataclasses import dataclass, field

import numpy as np

from src.grad_surgery import GradientView
from src.hetero_agg import GroupSpec
from src.model_zoo.config import Activation, StageNetConfig
from src.model_zoo.weights import ModelWeights, layer_shape
from src.shared.exceptions import InvalidLabelError, ModelError, ShapeMismatchError
from src.shared.models import LayerKey, LayerKind, layer_keys_for_depths
from src.tensor_core import Tensor, matmul


@dataclass
class ForwardCache:
    """Intermediate values kept for the backward pass."""

    weights: ModelWeights
    inputs: dict[LayerKey, Tensor] = field(default_factory=dict)
    preactivations: dict[LayerKey, Tensor] = field(default_factory=dict)
    logits: Tensor | None = None


def _activate(z: Tensor, activation: Activation) -> Tensor:
    if activation is Activation.TANH:
        return np.tanh(z)
    return np.maximum(z, 0.0)


def _activation_grad(z: Tensor, activation: Activation) -> Tensor:
    if activation is Activation.TANH:
        t = np.tanh(z)
        return 1.0 - t * t
    return (z > 0.0).astype(np.float64)


def _depths(group: GroupSpec | list[int]) -> list[int]:
    if isinstance(group, GroupSpec):
        return list(group.depth_per_stage)
    return [int(d) for d in group]


def init_model(
    cfg: StageNetConfig, group: GroupSpec | list[int], seed: int,
) -> ModelWeights:
    """
    Deterministically initialize the layers a group owns.

    Weights are He-uniform, U(-sqrt(6/fan_in), sqrt(6/fan_in)), drawn in
    forward order from one generator seeded with ``seed``; biases are zero.

    Args:
        cfg: Model family configuration.
        group: The group (or its per-stage depths) whose layers to create.
        seed: RNG seed.
    """
    depths = _depths(group)
    if len(depths) != cfg.stages:
        raise ModelError(f"group has {len(depths)} stages, model config has {cfg.stages}")

    rng = np.random.default_rng(seed)
    layers: dict[LayerKey, Tensor] = {}
    for key in layer_keys_for_depths(depths):
        rows, fan_out = layer_shape(cfg, key)
        fan_in = rows - 1
        limit = np.sqrt(6.0 / fan_in)
        weight = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        layers[key] = np.vstack([weight, np.zeros((1, fan_out))])
    return ModelWeights(cfg, layers)


def forward(
    w: ModelWeights, batch: Tensor,
) -> tuple[Tensor, list[Tensor], ForwardCache]:
    """
    Run the network on a batch.

    Returns:
        (logits of shape (n, num_classes), one post-activation feature
        matrix per stage taken after the stage's last layer, cache).

    Raises:
        ShapeMismatchError: If the batch width differs from input_dim.
    """
    cfg = w.config
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != cfg.input_dim:
        raise ShapeMismatchError(
            f"batch has shape {batch.shape}, expected (n, {cfg.input_dim})"
        )

    cache = ForwardCache(weights=w)
    stage_features: list[Tensor] = []
    keys = w.keys()
    h = batch
    for position, key in enumerate(keys):
        cache.inputs[key] = h
        z = matmul(h, w.weight(key)) + w.bias(key)
        cache.preactivations[key] = z
        if key.kind is LayerKind.CLASSIFIER:
            h = z
            continue
        h = _activate(z, cfg.activation)
        next_key = keys[position + 1]
        if next_key.stage != key.stage:
            stage_features.append(h)

    cache.logits = h
    return h, stage_features, cache


def _softmax(logits: Tensor) -> Tensor:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _check_labels(labels: np.ndarray, n: int, num_classes: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.shape != (n,):
        raise ShapeMismatchError(f"expected {n} labels, got shape {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise InvalidLabelError(
            f"labels must lie in [0, {num_classes}), got range "
            f"[{labels.min()}, {labels.max()}]"
        )
    return labels.astype(np.int64)


def cross_entropy(logits: Tensor, labels: np.ndarray) -> float:
    """Mean softmax cross-entropy."""
    labels = _check_labels(labels, logits.shape[0], logits.shape[1])
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    picked = shifted[np.arange(logits.shape[0]), labels]
    return float(np.mean(log_norm - picked))


def backward(cache: ForwardCache, labels: np.ndarray) -> dict[LayerKey, GradientView]:
    """
    Gradients of the mean softmax cross-entropy for every layer.

    Returns:
        layer -> GradientView with the packed (weight; bias) gradient.

    Raises:
        InvalidLabelError: If a label lies outside [0, num_classes).
    """
    if cache.logits is None:
        raise ModelError("backward called on an empty forward cache")
    w = cache.weights
    cfg = w.config
    logits = cache.logits
    n = logits.shape[0]
    labels = _check_labels(labels, n, cfg.num_classes)

    dz = _softmax(logits)
    dz[np.arange(n), labels] -= 1.0
    dz /= n

    keys = w.keys()
    grads: dict[LayerKey, GradientView] = {}
    for position in range(len(keys) - 1, -1, -1):
        key = keys[position]
        h_in = cache.inputs[key]
        grad_w = matmul(h_in.T, dz)
        grad_b = dz.sum(axis=0, keepdims=True)
        grads[key] = GradientView(layer=key, tensor=np.vstack([grad_w, grad_b]))
        if position > 0:
            prev = keys[position - 1]
            dh = matmul(dz, w.weight(key).T)
            dz = dh * _activation_grad(cache.preactivations[prev], cfg.activation)

    return {key: grads[key] for key in keys}

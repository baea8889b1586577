"""Depth-parameterized StageNet family with manual backprop and local training."""

from .config import Activation, StageNetConfig, TrainerConfig
from .stagenet import ForwardCache, backward, cross_entropy, forward, init_model
from .trainer import AdamOptimizer, SGDOptimizer, local_train
from .weights import ModelWeights, layer_shape

__all__ = [
    "Activation",
    "AdamOptimizer",
    "ForwardCache",
    "ModelWeights",
    "SGDOptimizer",
    "StageNetConfig",
    "TrainerConfig",
    "backward",
    "cross_entropy",
    "forward",
    "init_model",
    "layer_shape",
    "local_train",
]

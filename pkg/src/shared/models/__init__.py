from .layers import (
    LayerKey,
    LayerKind,
    layer_keys_for_depths,
)

__all__ = [
    "LayerKey",
    "LayerKind",
    "layer_keys_for_depths",
]

"""Minimal dense-array substrate used by every other component."""

from .ops import (
    Tensor,
    as_tensor,
    ensure_same_shape,
    inner,
    matmul,
    norm,
    trace_inner,
)

__all__ = [
    "Tensor",
    "as_tensor",
    "ensure_same_shape",
    "inner",
    "matmul",
    "norm",
    "trace_inner",
]

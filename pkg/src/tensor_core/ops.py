"""
Dense float64 tensor operations.

Tensors are numpy float64 arrays; the shape is metadata over the
row-major (C-order) flattening, so vector-form and matrix-form gradient
surgery share one code path. Reductions use numpy's pairwise summation
over the flattening, which is fixed-order and independent of thread count.
"""

from typing import Iterable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.shared.exceptions import NonFiniteError, ShapeMismatchError

Tensor = NDArray[np.float64]


def as_tensor(values: ArrayLike, shape: Iterable[int] | None = None) -> Tensor:
    """
    Build a validated, read-only float64 tensor.

    Args:
        values: Anything numpy can turn into an array.
        shape: Optional target shape; the flat values are reshaped to it.

    Returns:
        A C-contiguous float64 copy marked read-only.

    Raises:
        ShapeMismatchError: If the value count does not match ``shape``.
        NonFiniteError: If any value is NaN or Inf.
    """
    arr = np.array(values, dtype=np.float64, order="C", copy=True)
    if shape is not None:
        shape = tuple(int(s) for s in shape)
        if any(s <= 0 for s in shape):
            raise ShapeMismatchError(f"shape must contain positive integers, got {shape}")
        if arr.size != int(np.prod(shape)):
            raise ShapeMismatchError(
                f"cannot reshape {arr.size} values into shape {shape}"
            )
        arr = arr.reshape(shape)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("tensor contains NaN or Inf values")
    arr.flags.writeable = False
    return arr


def ensure_same_shape(a: Tensor, b: Tensor, what: str = "tensors") -> None:
    """Raise ShapeMismatchError unless ``a`` and ``b`` share a shape."""
    if a.shape != b.shape:
        raise ShapeMismatchError(f"{what} have mismatched shapes {a.shape} and {b.shape}")


def inner(a: Tensor, b: Tensor) -> float:
    """Flat inner product sum(a_i * b_i); equals tr(AᵀB) for matrices."""
    ensure_same_shape(a, b, "inner product operands")
    return float(np.sum(np.multiply(a, b).ravel()))


def norm(a: Tensor) -> float:
    """Euclidean (Frobenius) norm."""
    return float(np.sqrt(np.sum(np.square(a).ravel())))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of an (m×k) and a (k×n) tensor."""
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeMismatchError(f"matmul expects 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(f"matmul inner dimensions differ: {a.shape} @ {b.shape}")
    return np.matmul(a, b)


def trace_inner(a: Tensor, b: Tensor) -> float:
    """tr(AᵀB) via explicit transpose, matmul and trace (matrix-form reference)."""
    ensure_same_shape(a, b, "trace operands")
    if a.ndim == 1:
        a = a.reshape(-1, 1)
        b = b.reshape(-1, 1)
    return float(np.trace(matmul(a.T, b)))

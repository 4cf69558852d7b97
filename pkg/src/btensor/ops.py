"""Shape-aligned elementwise operators, marginalization, and mode sums.

The four operators (product, sum, difference, division) replicate both
operands to their joint shape and then apply the elementwise operation.
Division requires a divisor with no zero elements.
"""
from __future__ import annotations

import enum
from typing import Iterable, Sequence

import numpy as np

from .tensor import (
    BroadcastError,
    DenseTensor,
    ShapeError,
    bc,
    joint_shape,
    normalize_orders,
)

__all__ = [
    "BroadcastOpKind",
    "DivisionError",
    "broadcast_apply",
    "bproduct",
    "bsum",
    "bdifference",
    "bdivide",
    "hadamard",
    "marginalize",
    "mode_sum",
    "frobenius_norm",
]


class BroadcastOpKind(enum.Enum):
    PRODUCT = "product"
    SUM = "sum"
    DIFFERENCE = "difference"
    DIVISION = "division"


class DivisionError(ZeroDivisionError):
    """Raised when the divisor of a broadcast division has a zero element."""


_UFUNC = {
    BroadcastOpKind.PRODUCT: np.multiply,
    BroadcastOpKind.SUM: np.add,
    BroadcastOpKind.DIFFERENCE: np.subtract,
    BroadcastOpKind.DIVISION: np.divide,
}


def broadcast_apply(kind: BroadcastOpKind, x: DenseTensor, y: DenseTensor) -> DenseTensor:
    """Apply one of the four aligned elementwise operators to x and y."""
    out_shape = joint_shape(x.shape, y.shape)  # raises BroadcastError
    if kind is BroadcastOpKind.DIVISION and np.any(y.to_array() == 0.0):
        raise DivisionError("divisor has zero elements")
    xb = bc(x, out_shape).to_array()
    yb = bc(y, out_shape).to_array()
    return DenseTensor(_UFUNC[kind](xb, yb))


def bproduct(x: DenseTensor, y: DenseTensor) -> DenseTensor:
    return broadcast_apply(BroadcastOpKind.PRODUCT, x, y)


def bsum(x: DenseTensor, y: DenseTensor) -> DenseTensor:
    return broadcast_apply(BroadcastOpKind.SUM, x, y)


def bdifference(x: DenseTensor, y: DenseTensor) -> DenseTensor:
    return broadcast_apply(BroadcastOpKind.DIFFERENCE, x, y)


def bdivide(x: DenseTensor, y: DenseTensor) -> DenseTensor:
    return broadcast_apply(BroadcastOpKind.DIVISION, x, y)


def hadamard(x: DenseTensor, y: DenseTensor) -> DenseTensor:
    """Plain elementwise product; shapes must match exactly."""
    if x.shape != y.shape:
        raise ShapeError(f"hadamard needs equal shapes, got {x.shape} and {y.shape}")
    return DenseTensor(x.to_array() * y.to_array())


def marginalize(x: DenseTensor, other: Sequence[int]) -> DenseTensor:
    """Shrink ``x`` against a partner shape by per-fiber Frobenius norms.

    Along every mode where the partner has length 1 and ``x`` is longer, the
    root of the sum of squares is taken (jointly over all such modes); the
    result has per-mode length min(I_n, J_n).
    """
    sx, so = normalize_orders(x.shape, other)
    if not all(i == j or i == 1 or j == 1 for i, j in zip(sx, so)):
        raise BroadcastError(f"shapes {x.shape} and {tuple(other)} are not broadcast-compatible")
    a = x.to_array().reshape(sx, order="F")
    axes = tuple(n for n, (i, j) in enumerate(zip(sx, so)) if j == 1 and i > 1)
    if axes:
        a = np.sqrt(np.sum(a * a, axis=axes, keepdims=True))
    return DenseTensor(np.asarray(a))


def mode_sum(x: DenseTensor, modes: Iterable[int]) -> DenseTensor:
    """Sum entries along the given modes, keeping them as length-1 modes.

    Each output entry reduces its fiber in column-major order (deterministic
    summation), so alternate solution paths built on this agree bit-for-bit.
    """
    modes = sorted(set(int(m) for m in modes))
    if not modes:
        return DenseTensor(x.to_array())
    for m in modes:
        if not 1 <= m <= x.order:
            raise ShapeError(f"mode {m} out of range for order-{x.order} tensor")
    keep = [n for n in range(1, x.order + 1) if n not in modes]
    a = np.transpose(x.to_array(), [n - 1 for n in keep + modes])
    kept_shape = tuple(x.shape[n - 1] for n in keep)
    keep_size = int(np.prod(kept_shape)) if kept_shape else 1
    s = np.sum(a.reshape((keep_size, -1), order="F"), axis=1)
    back = np.transpose(
        s.reshape(kept_shape + (1,) * len(modes), order="F"),
        _inverse_axes(keep + modes),
    )
    return DenseTensor(back.copy(order="F"))


def _inverse_axes(order_1based: Sequence[int]) -> list[int]:
    inv = [0] * len(order_1based)
    for pos, m in enumerate(order_1based):
        inv[m - 1] = pos
    return inv


def frobenius_norm(x: DenseTensor) -> float:
    """Root of the sum of squared entries."""
    a = x.data
    return float(np.sqrt(np.dot(a, a)))

"""Dense tensor core: shape algebra, broadcasting, permutation, (un)folding.

A tensor here is a dense N-dimensional array of float64 values linearized in
column-major order (the first mode varies fastest).  Mode indices in the
public API are 1-based, matching the usual tensor-algebra convention; error
messages follow the same convention.

Shape alignment pads *trailing* length-1 modes only: ``(5, 4)`` is equivalent
to ``(5, 4, 1)`` but never to ``(1, 5, 4)``.  This is deliberately not
NumPy's rule (NumPy pads leading modes).
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ShapeError",
    "BroadcastError",
    "DenseTensor",
    "make_tensor",
    "from_array",
    "normalize_orders",
    "broadcast_compatible",
    "bc",
    "permute",
    "unfold",
    "fold",
    "reshape_group",
]

Shape = tuple[int, ...]


class ShapeError(ValueError):
    """Raised for malformed shapes, bad mode indices, or size mismatches."""


class BroadcastError(ValueError):
    """Raised when two shapes do not satisfy the broadcast condition."""


def _check_shape(dims: Iterable[int]) -> Shape:
    shape = tuple(int(d) for d in dims)
    if len(shape) == 0:
        raise ShapeError("shape must have at least one mode")
    if any(d < 1 for d in shape):
        raise ShapeError(f"all mode lengths must be >= 1, got {shape}")
    return shape


class DenseTensor:
    """Immutable dense float64 tensor, column-major linearization.

    Element (i_1, ..., i_N) (1-based) lives at linear index
    i_1 + I_1 (i_2 - 1) + I_1 I_2 (i_3 - 1) + ... in :attr:`data`.
    """

    __slots__ = ("_a",)

    def __init__(self, array: np.ndarray):
        a = np.asarray(array, dtype=np.float64)
        if a.ndim == 0:
            a = a.reshape(1)
        a = np.asfortranarray(a)
        a.flags.writeable = False
        self._a = a

    @property
    def shape(self) -> Shape:
        return self._a.shape

    @property
    def order(self) -> int:
        """Number of modes N."""
        return self._a.ndim

    @property
    def size(self) -> int:
        return self._a.size

    @property
    def data(self) -> np.ndarray:
        """Flat read-only view of the values in column-major order."""
        return self._a.ravel(order="F")

    def to_array(self) -> np.ndarray:
        """The underlying read-only ndarray (no copy)."""
        return self._a

    def __getitem__(self, key):
        return self._a[key]

    def __repr__(self) -> str:
        return f"DenseTensor(shape={self.shape})"

    def allclose(self, other: "DenseTensor", rtol: float = 1e-12, atol: float = 0.0) -> bool:
        return self.shape == other.shape and np.allclose(
            self._a, other._a, rtol=rtol, atol=atol
        )

    def equal(self, other: "DenseTensor") -> bool:
        """Bitwise equality of shape and values."""
        return self.shape == other.shape and np.array_equal(self._a, other._a)


def from_array(array: np.ndarray) -> DenseTensor:
    """Wrap an ndarray (copied to column-major float64)."""
    return DenseTensor(np.array(array, dtype=np.float64, copy=True))


def make_tensor(shape: Sequence[int], values: Sequence[float]) -> DenseTensor:
    """Build a tensor from its column-major value list."""
    shape = _check_shape(shape)
    vals = np.asarray(values, dtype=np.float64).ravel()
    n = int(np.prod(shape))
    if vals.size != n:
        raise ShapeError(
            f"shape {shape} needs {n} values, got {vals.size}"
        )
    return DenseTensor(vals.reshape(shape, order="F"))


def normalize_orders(a: Sequence[int], b: Sequence[int]) -> tuple[Shape, Shape]:
    """Pad the shorter shape with trailing 1s so both have equal order."""
    sa, sb = _check_shape(a), _check_shape(b)
    n = max(len(sa), len(sb))
    return sa + (1,) * (n - len(sa)), sb + (1,) * (n - len(sb))


def broadcast_compatible(a: Sequence[int], b: Sequence[int]) -> bool:
    """Broadcast condition: per mode, lengths equal or one of them is 1."""
    sa, sb = normalize_orders(a, b)
    return all(i == j or i == 1 or j == 1 for i, j in zip(sa, sb))


def joint_shape(a: Sequence[int], b: Sequence[int]) -> Shape:
    """Per-mode max of two broadcast-compatible shapes."""
    sa, sb = normalize_orders(a, b)
    if not all(i == j or i == 1 or j == 1 for i, j in zip(sa, sb)):
        raise BroadcastError(f"shapes {tuple(a)} and {tuple(b)} are not broadcast-compatible")
    return tuple(max(i, j) for i, j in zip(sa, sb))


def bc(x: DenseTensor, target: Sequence[int]) -> DenseTensor:
    """Replicate ``x`` along its length-1 modes to the joint shape with ``target``.

    The result has per-mode length max(I_n, J_n); it is materialized.
    """
    out_shape = joint_shape(x.shape, target)
    sx, _ = normalize_orders(x.shape, out_shape)
    a = x.to_array().reshape(sx, order="F")
    return DenseTensor(np.broadcast_to(a, out_shape).copy(order="F"))


def _check_mode(mode: int, order: int) -> None:
    if not 1 <= mode <= order:
        raise ShapeError(f"mode {mode} out of range for order-{order} tensor")


def permute(x: DenseTensor, perm: Sequence[int]) -> DenseTensor:
    """Reorder modes: output mode p holds input mode perm[p] (1-based)."""
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(1, x.order + 1)):
        raise ShapeError(f"{perm} is not a permutation of modes 1..{x.order}")
    return DenseTensor(np.transpose(x.to_array(), [p - 1 for p in perm]).copy(order="F"))


def inverse_permutation(perm: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(perm)
    for pos, p in enumerate(perm, start=1):
        inv[p - 1] = pos
    return tuple(inv)


def unfold(x: DenseTensor, mode: int) -> DenseTensor:
    """Mode-n unfolding: (I_mode, prod of the other mode lengths) matrix.

    Columns run over the remaining modes in column-major order (mode-n fibers
    become columns, the usual matricization convention).
    """
    _check_mode(mode, x.order)
    a = np.moveaxis(x.to_array(), mode - 1, 0)
    return DenseTensor(a.reshape(x.shape[mode - 1], -1, order="F"))


def fold(m: DenseTensor, mode: int, target: Sequence[int]) -> DenseTensor:
    """Inverse of :func:`unfold`: rebuild the tensor of shape ``target``."""
    target = _check_shape(target)
    _check_mode(mode, len(target))
    if m.order != 2:
        raise ShapeError(f"fold expects an order-2 tensor, got order {m.order}")
    rest = tuple(d for n, d in enumerate(target, start=1) if n != mode)
    expected = (target[mode - 1], int(np.prod(rest)) if rest else 1)
    if m.shape != expected:
        raise ShapeError(
            f"matrix shape {m.shape} inconsistent with target {target} at mode {mode}"
        )
    a = m.to_array().reshape((target[mode - 1],) + rest, order="F")
    return DenseTensor(np.moveaxis(a, 0, mode - 1).copy(order="F"))


def reshape_group(x: DenseTensor, groups: Sequence[Sequence[int]]) -> DenseTensor:
    """Collapse consecutive mode groups into single modes (column-major).

    ``groups`` must list every mode exactly once, in the tensor's current
    order; each group becomes one output mode of length equal to the product
    of its members.  An empty group yields a length-1 mode.
    """
    flat = [m for g in groups for m in g]
    if flat != list(range(1, x.order + 1)):
        raise ShapeError(
            f"groups {groups} must list modes 1..{x.order} exactly once, in order"
        )
    new_shape = tuple(int(np.prod([x.shape[m - 1] for m in g])) if g else 1 for g in groups)
    return DenseTensor(x.to_array().reshape(new_shape, order="F"))

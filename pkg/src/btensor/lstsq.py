"""Closed-form least squares for aligned-product models.

Solves ``min_W ||X - W boxdot H||_F^2`` exactly: a canonical third-order
solver and its general N-th order reduction.  Two equivalent routes are
implemented for the general case: the direct closed form
``P_R(X . H) / P_R(H . H)`` and a permute/regroup pipeline down to the
third-order solver.  Both use the same column-major fiber summation so they
agree bit-for-bit.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tensor import (
    BroadcastError,
    DenseTensor,
    ShapeError,
    broadcast_compatible,
    inverse_permutation,
    joint_shape,
    normalize_orders,
    permute,
    reshape_group,
)
from .ops import bdivide, bproduct, mode_sum

__all__ = [
    "SingularProblemError",
    "ModePartition",
    "classify_modes",
    "ls_solve_third_order",
    "ls_solve_general",
    "ls_solve_general_ridge",
]


class SingularProblemError(ValueError):
    """Raised when a least-squares denominator fiber sums to zero."""


@dataclass(frozen=True)
class ModePartition:
    """Mode classification for the N-th order reduction (1-based indices).

    ``left``: modes where the unknown is longer (partner has length 1);
    ``shared``: equal-length modes; ``right``: modes summed out (unknown has
    length 1, partner is longer).
    """

    left: frozenset[int]
    shared: frozenset[int]
    right: frozenset[int]


def classify_modes(w_shape: Sequence[int], h_shape: Sequence[int]) -> ModePartition:
    """Partition modes into (left, shared, right) for shapes D (unknown) and F.

    Modes with D_n = F_n = 1 are non-broadcasting and go to ``shared``.
    """
    d, f = normalize_orders(w_shape, h_shape)
    if not broadcast_compatible(d, f):
        raise BroadcastError(f"shapes {tuple(w_shape)} and {tuple(h_shape)} are not broadcast-compatible")
    left, shared, right = set(), set(), set()
    for n, (dn, fn) in enumerate(zip(d, f), start=1):
        if dn == fn:
            shared.add(n)
        elif fn == 1:
            left.add(n)
        else:
            right.add(n)
    return ModePartition(frozenset(left), frozenset(shared), frozenset(right))


def _check_positive_denominator(den: DenseTensor) -> None:
    if np.any(den.to_array() <= 0.0):
        raise SingularProblemError(
            "denominator has a zero fiber (all-zero slice of the known tensor)"
        )


def ls_solve_third_order(y: DenseTensor, z: DenseTensor) -> DenseTensor:
    """Minimize ||Y - A boxdot Z||_F^2 for Y (I,J,K), Z (1,J,K); A is (I,J,1).

    Closed form: sum Y.Z and Z.Z over mode 3, divide.
    """
    if y.order != 3 or z.order != 3:
        raise ShapeError("third-order solver needs order-3 tensors")
    i, j, k = y.shape
    if z.shape != (1, j, k):
        raise ShapeError(f"known tensor must have shape (1, {j}, {k}), got {z.shape}")
    num = mode_sum(bproduct(y, z), {3})
    den = mode_sum(bproduct(z, z), {3})
    _check_positive_denominator(den)
    return bdivide(num, den)


def _check_problem(x: DenseTensor, h: DenseTensor, w_shape: Sequence[int]) -> tuple[int, ...]:
    w_shape = tuple(int(d) for d in w_shape)
    if not broadcast_compatible(w_shape, h.shape):
        raise BroadcastError(
            f"unknown shape {w_shape} and known shape {h.shape} are not broadcast-compatible"
        )
    sx, sj = normalize_orders(x.shape, joint_shape(w_shape, h.shape))
    if sx != sj:
        raise ShapeError(
            f"observed shape {x.shape} must be the joint shape "
            f"{joint_shape(w_shape, h.shape)} of {w_shape} and {h.shape}"
        )
    return w_shape


def ls_solve_general(
    x: DenseTensor,
    h: DenseTensor,
    w_shape: Sequence[int],
    method: str = "direct",
) -> DenseTensor:
    """Minimize ||X - W boxdot H||_F^2 over W with the given shape.

    ``method="direct"`` evaluates ``P_R(X . H) / P_R(H . H)``;
    ``method="pipeline"`` permutes and regroups modes down to the canonical
    third-order problem and maps the solution back.  The two agree exactly.
    """
    w_shape = _check_problem(x, h, w_shape)
    part = classify_modes(w_shape, h.shape)
    if method == "direct":
        num = mode_sum(bproduct(x, h), part.right)
        den = mode_sum(bproduct(h, h), part.right)
        _check_positive_denominator(den)
        w = bdivide(num, den)
        return reshape_to(w, w_shape)
    if method == "pipeline":
        return _ls_solve_pipeline(x, h, w_shape, part)
    raise ValueError(f"unknown method {method!r}")


def _ls_solve_pipeline(
    x: DenseTensor, h: DenseTensor, w_shape: tuple[int, ...], part: ModePartition
) -> DenseTensor:
    d, f = normalize_orders(w_shape, h.shape)
    n = len(d)
    left = sorted(part.left)
    shared = sorted(part.shared)
    right = sorted(part.right)
    ordering = left + shared + right
    groups = (
        list(range(1, len(left) + 1)),
        list(range(len(left) + 1, len(left) + len(shared) + 1)),
        list(range(len(left) + len(shared) + 1, n + 1)),
    )

    x_n = reshape_to(x, joint_shape(d, f))
    h_n = reshape_to(h, f)
    y3 = reshape_group(permute(x_n, ordering), groups)
    z3 = reshape_group(permute(h_n, ordering), groups)
    a3 = ls_solve_third_order(y3, z3)

    w_perm_shape = tuple(d[m - 1] for m in ordering)
    w_perm = DenseTensor(a3.to_array().reshape(w_perm_shape, order="F"))
    w = permute(w_perm, inverse_permutation(ordering))
    return reshape_to(w, w_shape)


def ls_solve_general_ridge(
    x: DenseTensor, h: DenseTensor, w_shape: Sequence[int], ridge: float
) -> DenseTensor:
    """Like :func:`ls_solve_general` but adds ``ridge`` to every denominator.

    Total for ridge > 0 even when fibers of ``h`` vanish.
    """
    if ridge < 0:
        raise ValueError("ridge must be >= 0")
    w_shape = _check_problem(x, h, w_shape)
    part = classify_modes(w_shape, h.shape)
    num = mode_sum(bproduct(x, h), part.right)
    den = mode_sum(bproduct(h, h), part.right)
    den = DenseTensor(den.to_array() + ridge)
    _check_positive_denominator(den)
    return reshape_to(bdivide(num, den), w_shape)


def reshape_to(t: DenseTensor, shape: Sequence[int]) -> DenseTensor:
    """Adjust trailing length-1 modes so ``t`` has exactly ``shape``."""
    shape = tuple(int(d) for d in shape)
    a, b = normalize_orders(t.shape, shape)
    if a != b:
        raise ShapeError(f"cannot reshape {t.shape} to {shape}: dims differ beyond trailing 1s")
    return DenseTensor(t.to_array().reshape(shape, order="F"))

"""CP-ALS and Tucker-HOOI baselines with shared parameter accounting."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import DenseTensor, ShapeError
from .ops import bdifference, frobenius_norm
from .decomposition import BDFactors, FitConfig, FitTrace, bd_param_count

__all__ = [
    "CPModel",
    "TuckerModel",
    "cp_als",
    "tucker_hooi",
    "param_count",
]


@dataclass(frozen=True)
class CPModel:
    """Sum of R outer products; factor matrices (I,R), (J,R), (K,R)."""

    u1: np.ndarray
    u2: np.ndarray
    u3: np.ndarray

    def __post_init__(self):
        r = self.u1.shape[1]
        if self.u2.shape[1] != r or self.u3.shape[1] != r:
            raise ShapeError("factor matrices must share the same rank")

    @property
    def rank(self) -> int:
        return self.u1.shape[1]

    def reconstruct(self) -> DenseTensor:
        return DenseTensor(np.einsum("ir,jr,kr->ijk", self.u1, self.u2, self.u3))


@dataclass(frozen=True)
class TuckerModel:
    """Core tensor (r1,r2,r3) with orthonormal factor matrices."""

    core: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    u3: np.ndarray

    def __post_init__(self):
        if self.core.shape != (self.u1.shape[1], self.u2.shape[1], self.u3.shape[1]):
            raise ShapeError("core shape must match factor column counts")

    @property
    def ranks(self) -> tuple[int, int, int]:
        return self.core.shape

    def reconstruct(self) -> DenseTensor:
        return DenseTensor(
            np.einsum("abc,ia,jb,kc->ijk", self.core, self.u1, self.u2, self.u3)
        )


def _residual_sq(y: DenseTensor, model: DenseTensor) -> float:
    return frobenius_norm(bdifference(y, model)) ** 2


def cp_als(y: DenseTensor, R: int, cfg: FitConfig) -> tuple[CPModel, FitTrace]:
    """Alternating factor-matrix updates via Khatri-Rao normal equations.

    The Gram system gets a ``denom_epsilon`` ridge, so rank-deficient
    normal equations stay solvable.
    """
    if y.order != 3:
        raise ShapeError(f"expected a third-order tensor, got order {y.order}")
    if R < 1:
        raise ValueError("R must be >= 1")
    a = y.to_array()
    dims = y.shape
    rng = np.random.default_rng(cfg.seed)
    u = [rng.standard_normal((d, R)) for d in dims]

    # mode-n unfoldings with columns in column-major order over the other modes
    unf = [
        np.moveaxis(a, n, 0).reshape(dims[n], -1, order="F") for n in range(3)
    ]
    eye = np.eye(R)

    trace = FitTrace()
    prev = _residual_sq(y, CPModel(*u).reconstruct())
    for _ in range(cfg.max_iters):
        for n in range(3):
            others = [m for m in range(3) if m != n]
            # Khatri-Rao of the other factors; lower mode index varies fastest
            first, second = others[0], others[1]
            kr = (u[first][None, :, :] * u[second][:, None, :]).reshape(-1, R)
            gram = (u[first].T @ u[first]) * (u[second].T @ u[second])
            rhs = unf[n] @ kr
            u[n] = np.linalg.solve(gram + cfg.denom_epsilon * eye, rhs.T).T
        obj = _residual_sq(y, CPModel(*u).reconstruct())
        trace.objective_per_iter.append(obj)
        trace.iterations_run += 1
        if prev == 0.0 or abs(prev - obj) < cfg.rel_tol * prev:
            trace.converged = True
            break
        prev = obj
    return CPModel(*u), trace


def _mode_project(a: np.ndarray, mats: list[np.ndarray | None]) -> np.ndarray:
    """Multilinear product: apply mats[n].T along mode n (None = identity)."""
    out = a
    for n, m in enumerate(mats):
        if m is None:
            continue
        out = np.moveaxis(
            np.tensordot(m.T, out, axes=([1], [n])), 0, n
        )
    return out


def _leading_left_singular(mat: np.ndarray, r: int) -> np.ndarray:
    u, _, _ = np.linalg.svd(mat, full_matrices=False)
    return u[:, :r]


def tucker_hooi(
    y: DenseTensor, ranks: tuple[int, int, int], cfg: FitConfig
) -> tuple[TuckerModel, FitTrace]:
    """Higher-order orthogonal iteration, initialized by truncated HOSVD."""
    if y.order != 3:
        raise ShapeError(f"expected a third-order tensor, got order {y.order}")
    dims = y.shape
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != 3 or any(r < 1 or r > d for r, d in zip(ranks, dims)):
        raise ShapeError(f"ranks {ranks} must satisfy 1 <= r_n <= {dims}")
    a = y.to_array()

    u = [
        _leading_left_singular(
            np.moveaxis(a, n, 0).reshape(dims[n], -1, order="F"), ranks[n]
        )
        for n in range(3)
    ]

    def core_of(u_list):
        return _mode_project(a, u_list)

    trace = FitTrace()
    prev = _residual_sq(y, TuckerModel(core_of(u), *u).reconstruct())
    for _ in range(cfg.max_iters):
        for n in range(3):
            proj = _mode_project(a, [m if i != n else None for i, m in enumerate(u)])
            mat = np.moveaxis(proj, n, 0).reshape(dims[n], -1, order="F")
            u[n] = _leading_left_singular(mat, ranks[n])
        core = core_of(u)
        obj = _residual_sq(y, TuckerModel(core, *u).reconstruct())
        trace.objective_per_iter.append(obj)
        trace.iterations_run += 1
        if prev == 0.0 or abs(prev - obj) < cfg.rel_tol * prev:
            trace.converged = True
            break
        prev = obj
    return TuckerModel(core_of(u), *u), trace


def param_count(model) -> int:
    """Parameter count of a CP, Tucker, or sum-of-terms model."""
    if isinstance(model, CPModel):
        return model.rank * (model.u1.shape[0] + model.u2.shape[0] + model.u3.shape[0])
    if isinstance(model, TuckerModel):
        r1, r2, r3 = model.ranks
        return (
            r1 * r2 * r3
            + model.u1.shape[0] * r1
            + model.u2.shape[0] * r2
            + model.u3.shape[0] * r3
        )
    if isinstance(model, BDFactors):
        return bd_param_count(model.dims, 1)
    if isinstance(model, (list, tuple)) and model and all(
        isinstance(t, BDFactors) for t in model
    ):
        return bd_param_count(model[0].dims, len(model))
    raise TypeError(f"unsupported model type {type(model)!r}")

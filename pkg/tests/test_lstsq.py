import numpy as np
import pytest

from btensor import (
    BroadcastError,
    SingularProblemError,
    bc,
    bproduct,
    classify_modes,
    frobenius_norm,
    ls_solve_general,
    ls_solve_general_ridge,
    ls_solve_third_order,
    mode_sum,
)
from btensor.tensor import DenseTensor


def rand(shape, seed):
    return DenseTensor(np.random.default_rng(seed).standard_normal(shape))


def third_order_oracle(y, z):
    """Per-slice normal equations: a_j = Y_j z_j / (z_j' z_j)."""
    ya, za = y.to_array(), z.to_array()
    i, j, k = ya.shape
    out = np.empty((i, j, 1))
    for jj in range(j):
        zj = za[0, jj, :]
        yj = ya[:, jj, :]
        out[:, jj, 0] = yj @ zj / (zj @ zj)
    return out


def elementwise_oracle(x, h, w_shape):
    """Normal equations per unknown entry, summed over the broadcast modes."""
    joint = x.shape
    hb = bc(h, joint).to_array()
    xa = x.to_array()
    hs = h.shape + (1,) * (len(joint) - h.order)
    axes = tuple(
        n for n, (d, f) in enumerate(zip(w_shape + (1,) * (len(joint) - len(w_shape)), hs))
        if d == 1 and f > 1
    )
    num = np.sum(xa * hb, axis=axes, keepdims=True)
    den = np.sum(hb * hb, axis=axes, keepdims=True)
    return (num / den).reshape(w_shape, order="F")


class TestThirdOrder:
    def test_all_ones_known_gives_mean(self):
        y = rand((4, 3, 5), seed=1)
        z = DenseTensor(np.ones((1, 3, 5)))
        sol = ls_solve_third_order(y, z)
        np.testing.assert_allclose(
            sol.to_array(), np.mean(y.to_array(), axis=2, keepdims=True), rtol=1e-14
        )

    def test_exact_fit_recovers_unknown(self):
        a = rand((4, 3, 1), seed=2)
        z = DenseTensor(np.random.default_rng(3).standard_normal((1, 3, 5)) + 2.0)
        y = bproduct(a, z)
        sol = ls_solve_third_order(y, z)
        np.testing.assert_allclose(sol.to_array(), a.to_array(), rtol=1e-12)

    def test_matches_per_slice_oracle(self):
        y, z = rand((4, 3, 5), seed=4), rand((1, 3, 5), seed=5)
        sol = ls_solve_third_order(y, z)
        assert np.max(np.abs(sol.to_array() - third_order_oracle(y, z))) < 1e-12

    def test_zero_fiber_raises(self):
        y = rand((4, 3, 5), seed=6)
        za = np.random.default_rng(7).standard_normal((1, 3, 5))
        za[0, 1, :] = 0.0
        with pytest.raises(SingularProblemError):
            ls_solve_third_order(y, DenseTensor(za))


class TestClassifyModes:
    def test_worked_partition(self):
        p = classify_modes((10, 20, 1, 40, 50, 1), (10, 1, 30, 1, 50, 60))
        assert sorted(p.left) == [2, 4]
        assert sorted(p.shared) == [1, 5]
        assert sorted(p.right) == [3, 6]

    def test_identical_shapes_all_shared(self):
        p = classify_modes((3, 4, 5), (3, 4, 5))
        assert not p.left and not p.right
        assert sorted(p.shared) == [1, 2, 3]

    def test_forced_partition(self):
        p = classify_modes((3, 1), (1, 4))
        assert sorted(p.left) == [1]
        assert not p.shared
        assert sorted(p.right) == [2]

    def test_both_ones_go_to_shared(self):
        p = classify_modes((3, 1, 2), (3, 1, 1))
        assert 2 in p.shared

    def test_incompatible(self):
        with pytest.raises(BroadcastError):
            classify_modes((3, 2), (3, 3))


class TestGeneralSolve:
    DESK_D = (2, 3, 1, 4, 5, 1)
    DESK_F = (2, 1, 3, 1, 5, 6)

    def desk_problem(self, seed):
        rng = np.random.default_rng(seed)
        joint = tuple(max(d, f) for d, f in zip(self.DESK_D, self.DESK_F))
        x = DenseTensor(rng.standard_normal(joint))
        h = DenseTensor(rng.standard_normal(self.DESK_F))
        return x, h

    def test_third_order_special_case(self):
        y, z = rand((4, 3, 5), seed=8), rand((1, 3, 5), seed=9)
        general = ls_solve_general(y, z, (4, 3, 1))
        special = ls_solve_third_order(y, z)
        assert general.equal(special)

    def test_matches_elementwise_oracle(self):
        x, h = self.desk_problem(10)
        w = ls_solve_general(x, h, self.DESK_D)
        oracle = elementwise_oracle(x, h, self.DESK_D)
        assert np.max(np.abs(w.to_array() - oracle)) < 1e-10

    def test_all_ones_known_gives_mean_over_summed_modes(self):
        x, _ = self.desk_problem(11)
        h = DenseTensor(np.ones(self.DESK_F))
        w = ls_solve_general(x, h, self.DESK_D)
        expected = np.mean(x.to_array(), axis=(2, 5), keepdims=True)
        np.testing.assert_allclose(w.to_array(), expected, rtol=1e-13)

    def test_pipeline_equals_direct_bitwise(self):
        for seed in range(20):
            x, h = self.desk_problem(100 + seed)
            direct = ls_solve_general(x, h, self.DESK_D, method="direct")
            pipeline = ls_solve_general(x, h, self.DESK_D, method="pipeline")
            assert direct.equal(pipeline)

    def test_residual_orthogonality(self):
        x, h = self.desk_problem(12)
        w = ls_solve_general(x, h, self.DESK_D)
        resid = DenseTensor(x.to_array() - bproduct(w, h).to_array())
        part = classify_modes(self.DESK_D, self.DESK_F)
        gram = mode_sum(bproduct(resid, h), part.right)
        assert np.max(np.abs(gram.to_array())) < 1e-10

    def test_perturbation_never_improves(self):
        x, h = self.desk_problem(13)
        w = ls_solve_general(x, h, self.DESK_D)
        base = frobenius_norm(
            DenseTensor(x.to_array() - bproduct(w, h).to_array())
        ) ** 2
        rng = np.random.default_rng(14)
        for _ in range(100):
            d = rng.standard_normal(w.shape)
            wp = DenseTensor(w.to_array() + 1e-3 * d / np.linalg.norm(d))
            obj = frobenius_norm(
                DenseTensor(x.to_array() - bproduct(wp, h).to_array())
            ) ** 2
            assert obj >= base - 1e-12

    def test_observed_shape_mismatch(self):
        x, h = self.desk_problem(15)
        with pytest.raises(Exception):
            ls_solve_general(rand((2, 2, 2), seed=1), h, self.DESK_D)

    def test_singular_raises_and_ridge_does_not(self):
        x = rand((4, 3, 5), seed=16)
        za = np.random.default_rng(17).standard_normal((1, 3, 5))
        za[0, 0, :] = 0.0
        z = DenseTensor(za)
        with pytest.raises(SingularProblemError):
            ls_solve_general(x, z, (4, 3, 1))
        w = ls_solve_general_ridge(x, z, (4, 3, 1), ridge=1e-9)
        assert w.shape == (4, 3, 1)
        assert np.all(np.isfinite(w.to_array()))

    def test_ridge_negative_rejected(self):
        x, h = self.desk_problem(18)
        with pytest.raises(ValueError):
            ls_solve_general_ridge(x, h, self.DESK_D, ridge=-1.0)


class TestRandomThirdOrderBattery:
    def test_closed_form_vs_oracle_many(self):
        rng = np.random.default_rng(19)
        for _ in range(200):
            i, j, k = rng.integers(1, 7, size=3)
            y = DenseTensor(rng.standard_normal((i, j, k)))
            z = DenseTensor(rng.standard_normal((1, j, k)))
            sol = ls_solve_third_order(y, z)
            assert np.max(np.abs(sol.to_array() - third_order_oracle(y, z))) < 1e-12

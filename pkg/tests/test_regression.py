import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import ortho_group

from conftest import heuristic_specs, random_instance
from gradlearn.data import Dataset
from gradlearn.kernels import KernelSpec, WeightSpec, kernel_matrix, weight_matrix
from gradlearn.regression import (
    GradientModel,
    assemble_local_moments,
    dense_oracle_fit,
    fit_gradient_regression,
    predict_gradient,
    regression_objective,
    span_basis,
    stationarity_residual,
)


def rel_err(a, b):
    return np.abs(a - b).max() / max(np.abs(b).max(), 1e-300)


class TestSpanBasis:
    def test_all_equal_rows(self):
        basis, coords = span_basis(np.tile([1.0, 2.0, 3.0], (4, 1)))
        assert basis.shape == (3, 0) and coords.shape == (4, 0)

    def test_collinear_points(self, rng):
        direction = rng.normal(size=10)
        X = np.outer([0.0, 1.0, 2.5], direction) + rng.normal(size=10)
        basis, _ = span_basis(X)
        assert basis.shape[1] == 1

    def test_random_wide(self, rng):
        X = rng.normal(size=(5, 100))
        basis, coords = span_basis(X)
        assert basis.shape == (100, 4)
        np.testing.assert_allclose(basis.T @ basis, np.eye(4), atol=1e-10)
        recon = coords @ basis.T + X.mean(axis=0)
        assert np.abs(recon - X).max() < 1e-9
        # same subspace as a thin SVD of the centered data
        _, _, Vt = np.linalg.svd(X - X.mean(0), full_matrices=False)
        P1 = basis @ basis.T
        P2 = Vt[:4].T @ Vt[:4]
        assert np.abs(P1 - P2).max() < 1e-10


class TestLocalMoments:
    def test_constant_response(self, rng):
        X = rng.normal(size=(6, 3))
        basis, _ = span_basis(X)
        mom = assemble_local_moments(X, np.full(6, 2.0), WeightSpec(1.0), basis)
        np.testing.assert_array_equal(mom.h, 0.0)

    def test_two_points(self, rng):
        X = rng.normal(size=(2, 4))
        basis, _ = span_basis(X)
        w = WeightSpec(1.3)
        mom = assemble_local_moments(X, np.array([0.0, 1.0]), w, basis)
        v = basis.T @ (X[1] - X[0])
        w12 = weight_matrix(X, w)[0, 1]
        np.testing.assert_allclose(mom.B[0], w12 * np.outer(v, v), atol=1e-14)
        np.testing.assert_allclose(mom.h[0], w12 * v, atol=1e-14)

    def test_matches_double_loop(self, rng):
        X = rng.normal(size=(4, 6))
        y = rng.normal(size=4)
        basis, _ = span_basis(X)
        spec = WeightSpec(2.0)
        mom = assemble_local_moments(X, y, spec, basis)
        W = weight_matrix(X, spec)
        for i in range(4):
            B = np.zeros((3, 3))
            h = np.zeros(3)
            for j in range(4):
                v = basis.T @ (X[j] - X[i])
                B += W[i, j] * np.outer(v, v)
                h += W[i, j] * (y[j] - y[i]) * v
            np.testing.assert_allclose(mom.B[i], B, atol=1e-13)
            np.testing.assert_allclose(mom.h[i], h, atol=1e-13)
            assert np.linalg.eigvalsh(mom.B[i]).min() > -1e-12


class TestFit:
    def test_constant_response_gives_zero(self, rng):
        X = rng.normal(size=(7, 4))
        k, w = heuristic_specs(X)
        m = fit_gradient_regression(Dataset(X, np.full(7, 3.0)), k, w, 0.1)
        np.testing.assert_array_equal(m.coefficients, 0.0)
        np.testing.assert_array_equal(predict_gradient(m, rng.normal(size=4)), 0.0)

    def test_exact_linear_slope(self, rng):
        X = rng.normal(size=(6, 3))
        y = 3 * X[:, 0] - 2 * X[:, 1]
        k, _ = heuristic_specs(X)
        data = Dataset(X, y)
        w = WeightSpec(100.0)
        m = fit_gradient_regression(data, k, w, 1e-6)
        G = predict_gradient(m, X)
        assert np.abs(G - [3.0, -2.0, 0.0]).max() < 1e-2
        assert rel_err(m.coefficients, dense_oracle_fit(data, k, w, 1e-6).coefficients) < 1e-8

    def test_matches_dense_oracle(self, rng):
        data = random_instance(rng, 8, 5)
        k, w = heuristic_specs(data.X)
        fast = fit_gradient_regression(data, k, w, 1e-3)
        dense = dense_oracle_fit(data, k, w, 1e-3)
        assert rel_err(fast.coefficients, dense.coefficients) < 1e-8
        assert fast.objective_value == pytest.approx(dense.objective_value, rel=1e-10)

    def test_coincident_points_warn(self):
        data = Dataset(np.ones((3, 2)), [0.0, 1.0, 2.0])
        with pytest.warns(UserWarning):
            m = fit_gradient_regression(data, KernelSpec(1.0), WeightSpec(1.0), 1e-3)
        np.testing.assert_array_equal(m.coefficients, 0.0)

    def test_rejects_bad_lambda(self, rng):
        data = random_instance(rng, 4, 2)
        with pytest.raises(ValueError):
            fit_gradient_regression(data, KernelSpec(1.0), WeightSpec(1.0), 0.0)

    def test_wide_data(self, rng):
        # p >> n: reduced system has size n(n-1)
        data = random_instance(rng, 12, 500)
        k, w = heuristic_specs(data.X)
        m = fit_gradient_regression(data, k, w)
        assert m.coefficients.shape == (500, 12)
        assert stationarity_residual(m, data.y) < 1e-8


class TestDenseOracle:
    def test_constant_response(self, rng):
        X = rng.normal(size=(5, 3))
        m = dense_oracle_fit(Dataset(X, np.ones(5)), KernelSpec(1.0), WeightSpec(1.0), 1e-2)
        np.testing.assert_array_equal(m.coefficients, 0.0)

    def test_single_sample(self):
        m = dense_oracle_fit(Dataset([[1.0, 2.0]], [5.0]), KernelSpec(1.0), WeightSpec(1.0), 1e-2)
        np.testing.assert_array_equal(m.coefficients, 0.0)

    def test_beats_zero(self, rng):
        data = random_instance(rng, 6, 3)
        k, w = heuristic_specs(data.X)
        m = dense_oracle_fit(data, k, w, 1e-2)
        W = weight_matrix(data.X, w)
        zero_obj = np.sum(W * (data.y[None, :] - data.y[:, None]) ** 2) / 36
        assert m.objective_value <= zero_obj

    def test_size_guard(self):
        data = Dataset(np.zeros((50, 41)), np.zeros(50))
        with pytest.raises(ValueError, match="dense oracle"):
            dense_oracle_fit(data, KernelSpec(1.0), WeightSpec(1.0), 1e-2)


class TestPredict:
    def test_zero_model(self):
        m = GradientModel(np.zeros((3, 4)), np.eye(4, 3), KernelSpec(1.0), WeightSpec(1.0), 1e-3)
        np.testing.assert_array_equal(predict_gradient(m, np.ones(3)), 0.0)

    def test_tiny_sigma_is_one_hot(self, rng):
        data = random_instance(rng, 5, 3)
        _, w = heuristic_specs(data.X)
        m = fit_gradient_regression(data, KernelSpec(1e-4), w, 1e-3)
        for i in range(5):
            np.testing.assert_allclose(predict_gradient(m, data.X[i]), m.coefficients[:, i], rtol=1e-12)

    def test_linear_in_coefficients(self, rng):
        data = random_instance(rng, 5, 3)
        k, w = heuristic_specs(data.X)
        m = fit_gradient_regression(data, k, w)
        scaled = GradientModel(2.5 * m.coefficients, m.train_points, k, w, m.lam)
        x = rng.normal(size=(4, 3))
        np.testing.assert_allclose(predict_gradient(scaled, x), 2.5 * predict_gradient(m, x), rtol=1e-14)

    def test_batch_matches_single(self, rng):
        data = random_instance(rng, 5, 3)
        k, w = heuristic_specs(data.X)
        m = fit_gradient_regression(data, k, w)
        x = rng.normal(size=(3, 3))
        batch = predict_gradient(m, x)
        for a in range(3):
            np.testing.assert_allclose(batch[a], predict_gradient(m, x[a]), rtol=1e-14)

    def test_dimension_mismatch(self, rng):
        data = random_instance(rng, 5, 3)
        k, w = heuristic_specs(data.X)
        m = fit_gradient_regression(data, k, w)
        with pytest.raises(ValueError):
            predict_gradient(m, np.ones(4))


instances = st.tuples(
    st.integers(min_value=2, max_value=10),
    st.integers(min_value=1, max_value=8),
    st.integers(0, 2**32 - 1),
)


class TestProperties:
    @given(instances, st.sampled_from([1e-4, 1e-2, 1.0]))
    def test_span_reduction_exact(self, inst, lam):
        n, p, seed = inst
        data = random_instance(np.random.default_rng(seed), n, p)
        k, w = heuristic_specs(data.X)
        fast = fit_gradient_regression(data, k, w, lam)
        dense = dense_oracle_fit(data, k, w, lam)
        assert rel_err(fast.coefficients, dense.coefficients) < 1e-8

    @given(instances, st.floats(min_value=-50, max_value=50).filter(lambda a: abs(a) > 1e-3))
    def test_response_linearity(self, inst, a):
        n, p, seed = inst
        data = random_instance(np.random.default_rng(seed), n, p)
        k, w = heuristic_specs(data.X)
        base = fit_gradient_regression(data, k, w, 1e-2)
        scaled = fit_gradient_regression(Dataset(data.X, a * data.y), k, w, 1e-2)
        np.testing.assert_allclose(scaled.coefficients, a * base.coefficients, rtol=1e-9,
                                   atol=1e-12 * abs(a) * np.abs(base.coefficients).max())

    @given(instances)
    def test_translation_invariance(self, inst):
        n, p, seed = inst
        rng = np.random.default_rng(seed)
        data = random_instance(rng, n, p)
        k, w = heuristic_specs(data.X)
        shift = 5.0 * rng.normal(size=p)
        a = fit_gradient_regression(data, k, w, 1e-2)
        b = fit_gradient_regression(Dataset(data.X + shift, data.y), k, w, 1e-2)
        assert np.abs(a.coefficients - b.coefficients).max() < 1e-9 * max(1.0, np.abs(a.coefficients).max())

    @given(instances)
    def test_rotation_equivariance(self, inst):
        n, p, seed = inst
        data = random_instance(np.random.default_rng(seed), n, p)
        R = ortho_group.rvs(p, random_state=seed) if p > 1 else np.array([[-1.0]])
        k, w = heuristic_specs(data.X)
        a = fit_gradient_regression(data, k, w, 1e-2)
        b = fit_gradient_regression(Dataset(data.X @ R.T, data.y), k, w, 1e-2)
        assert np.abs(b.coefficients - R @ a.coefficients).max() < 1e-8 * max(1.0, np.abs(a.coefficients).max())

    @given(instances)
    def test_monotone_shrinkage(self, inst):
        n, p, seed = inst
        data = random_instance(np.random.default_rng(seed), n, p)
        k, w = heuristic_specs(data.X)
        norms = [fit_gradient_regression(data, k, w, lam).rkhs_norm_sq() for lam in np.logspace(-5, 2, 8)]
        assert all(b <= a * (1 + 1e-9) + 1e-15 for a, b in zip(norms, norms[1:]))

    @given(instances)
    def test_finite_difference_stationarity(self, inst):
        n, p, seed = inst
        rng = np.random.default_rng(seed)
        data = random_instance(rng, n, p)
        k, w = heuristic_specs(data.X)
        lam = 1e-2
        m = fit_gradient_regression(data, k, w, lam)
        K = kernel_matrix(data.X, k)
        W = weight_matrix(data.X, w)
        h = 1e-6
        for _ in range(20):
            D = rng.normal(size=m.coefficients.shape)
            D /= np.linalg.norm(D)
            up = regression_objective(m.coefficients + h * D, data.X, data.y, K, W, lam)
            dn = regression_objective(m.coefficients - h * D, data.X, data.y, K, W, lam)
            assert abs(up - dn) / (2 * h) < 1e-5

    def test_objective_value_recorded(self, rng):
        data = random_instance(rng, 6, 4)
        k, w = heuristic_specs(data.X)
        m = fit_gradient_regression(data, k, w, 1e-3)
        K = kernel_matrix(data.X, k)
        W = weight_matrix(data.X, w)
        assert m.objective_value == pytest.approx(
            regression_objective(m.coefficients, data.X, data.y, K, W, 1e-3), rel=1e-14
        )

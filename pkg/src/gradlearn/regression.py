"""Gradient learning for regression in a vector-valued RKHS.

The estimator minimizes

    (1/n^2) sum_ij w_ij (y_j - y_i - f(x_i) . (x_j - x_i))^2 + lam |f|_K^2

over f = sum_i c_i K(., x_i). Its stationarity system is

    B_i (sum_l K_il c_l) + n^2 lam c_i = h_i,   i = 1..n,

with B_i = sum_j w_ij d_ij d_ij^T, h_i = sum_j w_ij (y_j - y_i) d_ij and
d_ij = x_j - x_i. Every d_ij lies in the span of the centered data, so the
system is solved exactly in an r-dimensional basis of that span
(r <= n - 1) and lifted back to R^p.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .data import Dataset
from .errors import NumericalError
from .kernels import (
    KernelSpec,
    WeightSpec,
    cross_kernel,
    kernel_matrix,
    weight_matrix,
)

DEFAULT_LAMBDA = 1e-4
DENSE_ORACLE_LIMIT = 2000
SPAN_RTOL = 1e-10


@dataclass(frozen=True)
class LocalMoments:
    """Per-point weighted moments in a reduced orthonormal basis.

    ``B`` has shape (n, r, r) and ``h`` shape (n, r); ``basis`` is p x r.
    """

    B: np.ndarray
    h: np.ndarray
    basis: np.ndarray

    @property
    def r(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True)
class GradientModel:
    """Fitted gradient field ``f(x) = coefficients @ k(x)``."""

    coefficients: np.ndarray  # p x n, column i is c_i
    train_points: np.ndarray  # n x p
    kernel: KernelSpec
    weight: WeightSpec
    lam: float
    objective_value: float = field(default=float("nan"))

    @property
    def n(self) -> int:
        return self.train_points.shape[0]

    @property
    def p(self) -> int:
        return self.train_points.shape[1]

    def rkhs_norm_sq(self) -> float:
        K = kernel_matrix(self.train_points, self.kernel)
        return rkhs_norm_sq(self.coefficients, K)


def span_basis(X) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis of the affine span of the rows of ``X``.

    Returns ``(basis, coords)`` with ``coords @ basis.T + X.mean(0) == X``.
    Directions whose singular value falls below ``1e-10`` times the
    largest are dropped.
    """
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    if n < 2:
        raise ValueError("span basis needs at least two points")
    Xc = X - X.mean(axis=0)
    _, sv, Vt = np.linalg.svd(Xc, full_matrices=False)
    if sv.size == 0 or sv[0] == 0.0:
        return np.zeros((p, 0)), np.zeros((n, 0))
    r = int(np.sum(sv > SPAN_RTOL * sv[0]))
    basis = Vt[:r].T
    return basis, Xc @ basis


def assemble_local_moments(X, y, weight: WeightSpec, basis) -> LocalMoments:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    basis = np.asarray(basis, dtype=float)
    if basis.shape[0] != X.shape[1]:
        raise ValueError("basis and data dimensions disagree")
    W = weight_matrix(X, weight)
    Z = X @ basis
    D = Z[None, :, :] - Z[:, None, :]  # D[i, j] = basis^T (x_j - x_i)
    dy = y[None, :] - y[:, None]
    B = np.einsum("ij,ija,ijb->iab", W, D, D, optimize=True)
    h = np.einsum("ij,ija->ia", W * dy, D, optimize=True)
    return LocalMoments(B=B, h=h, basis=basis)


def rkhs_norm_sq(C, K) -> float:
    """``|f|_K^2 = trace(C K C^T)`` for ``f = C k(.)``."""
    return float(np.einsum("al,lm,am->", C, K, C, optimize=True))


def _pair_projections(F, U):
    """``T[i, j] = F[:, i] . (U[j] - U[i])`` for gradient values F (q x n)."""
    P = F.T @ U.T
    return P - np.diag(P)[:, None]


def regression_objective(C, X, y, K, W, lam) -> float:
    """Normalized weighted risk plus ridge, evaluated in ambient coordinates."""
    C = np.asarray(C, dtype=float)
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    F = C @ K
    resid = (y[None, :] - y[:, None]) - _pair_projections(F, X)
    return float(np.sum(W * resid**2) / n**2 + lam * rkhs_norm_sq(C, K))


def stationarity_residual(model: GradientModel, y) -> float:
    """Scaled maximum violation of the stationarity system.

    Computed from ambient coordinates without forming any B_i, so it is
    independent of the reduced solve.
    """
    X = model.train_points
    y = np.asarray(y, dtype=float)
    n = model.n
    K = kernel_matrix(X, model.kernel)
    W = weight_matrix(X, model.weight)
    C = model.coefficients
    F = C @ K

    def moment(coef):  # sum_j coef_ij (x_j - x_i), one row per i
        return coef @ X - coef.sum(axis=1)[:, None] * X

    Bf = moment(W * _pair_projections(F, X))
    h = moment(W * (y[None, :] - y[:, None]))
    lhs = Bf + n**2 * model.lam * C.T
    num = np.linalg.norm(lhs - h, axis=1).max(initial=0.0)
    den = 1.0 + np.linalg.norm(h, axis=1).max(initial=0.0)
    return float(num / den)


def _check_inputs(data: Dataset, lam: float):
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if not np.all(np.isfinite(data.X)) or not np.all(np.isfinite(data.y)):
        raise ValueError("data contain non-finite values")


def _solve(M, rhs):
    """Dense solve with diagonal jitter escalation on failure."""
    scale = max(np.abs(np.diag(M)).max(initial=0.0), 1.0)
    eye = np.eye(M.shape[0])
    for jitter in (0.0, 1e-14, 1e-12, 1e-10):
        try:
            sol = linalg.solve(M + jitter * scale * eye, rhs, check_finite=False)
        except (linalg.LinAlgError, ValueError):
            continue
        if np.all(np.isfinite(sol)):
            return sol
    raise NumericalError(
        "gradient system is singular; increase lambda or check the data"
    )


def fit_gradient_regression(
    data: Dataset,
    kernel: KernelSpec,
    weight: WeightSpec,
    lam: float = DEFAULT_LAMBDA,
) -> GradientModel:
    """Fit the regression gradient field by the span-reduced exact solve."""
    _check_inputs(data, lam)
    X, y = data.X, data.y
    n, p = X.shape
    if n < 2:
        raise ValueError("need at least two samples")
    basis, _ = span_basis(X)
    r = basis.shape[1]
    K = kernel_matrix(X, kernel)
    if r == 0:
        warnings.warn("all points coincide; returning the zero gradient model")
        C = np.zeros((p, n))
    else:
        mom = assemble_local_moments(X, y, weight, basis)
        # block (i, l) = K_il B_i + delta_il n^2 lam I_r
        M = np.einsum("il,iab->ialb", K, mom.B).reshape(n * r, n * r)
        M[np.diag_indices_from(M)] += n**2 * lam
        A = _solve(M, mom.h.reshape(-1)).reshape(n, r)
        C = basis @ A.T
    W = weight_matrix(X, weight)
    obj = regression_objective(C, X, y, K, W, lam)
    return GradientModel(C, X.copy(), kernel, weight, lam, obj)


def dense_oracle_fit(
    data: Dataset,
    kernel: KernelSpec,
    weight: WeightSpec,
    lam: float = DEFAULT_LAMBDA,
) -> GradientModel:
    """Reference solver: the full np x np stationarity system, no reduction."""
    _check_inputs(data, lam)
    X, y = data.X, data.y
    n, p = X.shape
    if n * p > DENSE_ORACLE_LIMIT:
        raise ValueError(
            f"dense oracle limited to n*p <= {DENSE_ORACLE_LIMIT}, got {n * p}"
        )
    K = kernel_matrix(X, kernel)
    W = weight_matrix(X, weight)
    D = X[None, :, :] - X[:, None, :]
    B = np.einsum("ij,ija,ijb->iab", W, D, D)
    h = np.einsum("ij,ija->ia", W * (y[None, :] - y[:, None]), D)
    M = np.einsum("il,iab->ialb", K, B).reshape(n * p, n * p)
    M[np.diag_indices_from(M)] += n**2 * lam
    C = _solve(M, h.reshape(-1)).reshape(n, p).T
    obj = regression_objective(C, X, y, K, W, lam)
    return GradientModel(C, X.copy(), kernel, weight, lam, obj)


def predict_gradient(model, x) -> np.ndarray:
    """Evaluate the gradient field at one point (p,) or many (m, p)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    if pts.shape[1] != model.train_points.shape[1]:
        raise ValueError(
            f"expected points of dimension {model.train_points.shape[1]}, "
            f"got {pts.shape[1]}"
        )
    k = cross_kernel(model.train_points, pts, model.kernel)  # n x m
    out = (model.coefficients @ k).T
    return out[0] if single else out

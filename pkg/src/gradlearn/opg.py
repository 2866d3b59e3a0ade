"""Outer product of gradients (OPG) baseline and its PCA-preprocessed
variant.

At every sample point x_j a weighted local linear fit

    min_{a, b} sum_i w_ij (y_i - a - b^T (x_i - x_j))^2 + ridge |b|^2

gives a slope b_j; the gradient outer product estimate is
(1/n) sum_j b_j b_j^T.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .data import Dataset
from .errors import NumericalError
from .kernels import WeightSpec, weight_matrix
from .spectral import GramKind, LowRankGram

DEFAULT_RIDGE_SCALE = 1e-8


@dataclass(frozen=True)
class OpgFit:
    intercepts: np.ndarray  # n
    slopes: np.ndarray  # p x n, column j is b_j
    ridge_used: float  # largest ridge applied over the local fits


@dataclass(frozen=True)
class PcaMap:
    mean: np.ndarray
    components: np.ndarray  # p x m

    @property
    def m(self) -> int:
        return self.components.shape[1]


def _local_normal_equations(X, y, w, j):
    D = np.hstack([np.ones((X.shape[0], 1)), X - X[j]])
    Dw = D * w[:, None]
    return Dw.T @ D, Dw.T @ y, D


def opg_fit(data: Dataset, weight: WeightSpec, ridge: float | None = None) -> OpgFit:
    """Per-point weighted least squares slopes.

    ``ridge=None`` picks ``1e-8 * trace`` of each local weighted second
    moment matrix when p >= n and no ridge otherwise. With ``ridge=0`` a
    rank-deficient local design raises ``NumericalError``.
    """
    X, y = data.X, data.y
    n, p = X.shape
    if n < 2:
        raise ValueError("OPG needs at least two samples")
    if ridge is not None and ridge < 0:
        raise ValueError("ridge must be nonnegative")
    W = weight_matrix(X, weight)
    intercepts = np.empty(n)
    slopes = np.empty((p, n))
    used = 0.0
    for j in range(n):
        A, rhs, D = _local_normal_equations(X, y, W[:, j], j)
        if ridge is None:
            rj = DEFAULT_RIDGE_SCALE * np.trace(A[1:, 1:]) if p >= n else 0.0
        else:
            rj = ridge
        if rj == 0.0:
            rank = np.linalg.matrix_rank(D * np.sqrt(W[:, j])[:, None])
            if rank < p + 1:
                raise NumericalError(
                    f"local design at point {j} has rank {rank} < p + 1 = {p + 1}; "
                    "use a positive ridge"
                )
        A[1:, 1:] += rj * np.eye(p)
        try:
            sol = linalg.solve(A, rhs, assume_a="sym", check_finite=False)
        except linalg.LinAlgError as exc:
            raise NumericalError(f"singular local system at point {j}") from exc
        intercepts[j] = sol[0]
        slopes[:, j] = sol[1:]
        used = max(used, rj)
    return OpgFit(intercepts, slopes, used)


def opg_gram(fit: OpgFit) -> LowRankGram:
    n = fit.slopes.shape[1]
    return LowRankGram(fit.slopes / np.sqrt(n), GramKind.GOP)


def pca_fit(X, m: int) -> PcaMap:
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    if not 1 <= m <= min(n - 1, p):
        raise ValueError(f"m must be in [1, {min(n - 1, p)}], got {m}")
    mean = X.mean(axis=0)
    _, _, Vt = np.linalg.svd(X - mean, full_matrices=False)
    return PcaMap(mean, Vt[:m].T.copy())


def pca_apply(pca: PcaMap, X) -> np.ndarray:
    return (np.atleast_2d(np.asarray(X, float)) - pca.mean) @ pca.components


def pca_lift(pca: PcaMap, directions) -> np.ndarray:
    """Map directions (m x k) in PC space back to R^p."""
    return pca.components @ np.asarray(directions, float)


def pc_opg(data: Dataset, m: int, weight: WeightSpec, ridge: float | None = None):
    """OPG on the top-m principal component scores.

    Returns ``(gram, pca)`` where ``gram`` is already lifted to R^p.
    """
    pca = pca_fit(data.X, m)
    fit = opg_fit(Dataset(pca_apply(pca, data.X), data.y), weight, ridge)
    gram = opg_gram(fit)
    return LowRankGram(pca_lift(pca, gram.factor), GramKind.GOP), pca

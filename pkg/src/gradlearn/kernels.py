"""Gaussian kernels, locality weights, bandwidth heuristics and a
jittered Cholesky factorization.

Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .errors import DegenerateDataError, NumericalError

__all__ = [
    "KernelSpec",
    "WeightFactor",
    "WeightSpec",
    "PsdFactor",
    "gaussian_kernel",
    "kernel_matrix",
    "cross_kernel",
    "weight_matrix",
    "median_pairwise_distance",
    "default_bandwidths",
    "cholesky_psd",
]


@dataclass(frozen=True)
class KernelSpec:
    """Mercer kernel ``K(x, u) = exp(-|x - u|^2 / sigma^2)``."""

    sigma: float
    family: str = "gaussian"

    def __post_init__(self):
        if self.family != "gaussian":
            raise ValueError(f"unsupported kernel family {self.family!r}")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"kernel sigma must be positive, got {self.sigma}")


class WeightFactor(enum.Enum):
    """Denominator of the locality weight exponent."""

    ONE_S_SQ = 1  # exp(-d^2 / s^2)
    TWO_S_SQ = 2  # exp(-d^2 / (2 s^2))


@dataclass(frozen=True)
class WeightSpec:
    """Locality weights ``w_ij = exp(-|x_i - x_j|^2 / (c s^2))``, c in {1, 2}."""

    s: float
    factor: WeightFactor = WeightFactor.ONE_S_SQ

    def __post_init__(self):
        if not (np.isfinite(self.s) and self.s > 0):
            raise ValueError(f"weight bandwidth s must be positive, got {self.s}")
        if not isinstance(self.factor, WeightFactor):
            object.__setattr__(self, "factor", WeightFactor(self.factor))

    @property
    def denominator(self) -> float:
        return self.factor.value * self.s**2


@dataclass(frozen=True)
class PsdFactor:
    """Lower-triangular ``L`` with ``L @ L.T == M + jitter_used * I``."""

    L: np.ndarray
    jitter_used: float


def _as_points(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError(f"expected a 2-d data matrix, got shape {X.shape}")
    return X


def _sqdist(X1: np.ndarray, X2: np.ndarray) -> np.ndarray:
    if X1.shape[1] != X2.shape[1]:
        raise ValueError(
            f"dimension mismatch: {X1.shape[1]} vs {X2.shape[1]} columns"
        )
    return cdist(X1, X2, "sqeuclidean")


def gaussian_kernel(x, u, spec: KernelSpec) -> float:
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.shape != u.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {u.shape}")
    d2 = float(np.sum((x - u) ** 2))
    return float(np.exp(-d2 / spec.sigma**2))


def cross_kernel(X1, X2, spec: KernelSpec) -> np.ndarray:
    """Kernel values ``K(X1[a], X2[b])`` as an ``len(X1) x len(X2)`` array."""
    X1, X2 = _as_points(X1), _as_points(X2)
    return np.exp(-_sqdist(X1, X2) / spec.sigma**2)


def kernel_matrix(X, spec: KernelSpec) -> np.ndarray:
    X = _as_points(X)
    K = cross_kernel(X, X, spec)
    np.fill_diagonal(K, 1.0)
    return K


def weight_matrix(X, spec: WeightSpec) -> np.ndarray:
    X = _as_points(X)
    W = np.exp(-_sqdist(X, X) / spec.denominator)
    np.fill_diagonal(W, 1.0)
    return W


def median_pairwise_distance(X) -> float:
    """Median Euclidean distance over distinct pairs of rows.

    Returns 0.0 when all points coincide; callers that need a bandwidth
    treat that as degenerate.
    """
    X = _as_points(X)
    if X.shape[0] < 2:
        raise ValueError("median pairwise distance needs at least two points")
    return float(np.median(pdist(X)))


def default_bandwidths(X) -> tuple[float, float]:
    """Heuristic ``(s, sigma)``: s is the median pairwise distance and the
    kernel width is a fifth of it."""
    med = median_pairwise_distance(X)
    if not med > 0:
        raise DegenerateDataError(
            "median pairwise distance is zero; all points coincide"
        )
    return med, 0.2 * med


def cholesky_psd(M, max_retries: int = 6) -> PsdFactor:
    """Cholesky factor of a symmetric PSD matrix with escalating jitter.

    The first attempt uses no jitter. Each retry adds
    ``1e-12 * trace(M) / n * 10**k`` to the diagonal, k = 0..max_retries-1.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    scale = max(np.abs(M).max(initial=0.0), 1.0)
    if not np.allclose(M, M.T, rtol=0, atol=1e-12 * scale):
        raise ValueError("matrix is not symmetric")
    n = M.shape[0]
    if n == 0:
        return PsdFactor(np.zeros((0, 0)), 0.0)
    tr = float(np.trace(M))
    base = 1e-12 * tr / n if tr > 0 else 1e-12
    jitters = [0.0] + [base * 10.0**k for k in range(max_retries)]
    eye = np.eye(n)
    for jitter in jitters:
        try:
            L = np.linalg.cholesky(M + jitter * eye)
        except np.linalg.LinAlgError:
            continue
        return PsdFactor(L, jitter)
    raise NumericalError(
        f"Cholesky failed with jitter up to {jitters[-1]:.3g}; "
        "matrix is not positive semidefinite"
    )

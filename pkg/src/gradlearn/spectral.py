"""Gradient outer product and gradient covariance matrices in low-rank
form, and their leading eigenpairs.

Both matrices are held as ``F @ F.T`` with a p x n factor ``F``; no p x p
array is ever formed. Eigenpairs come from a thin QR of ``F`` followed by
an SVD of the small triangular factor, O(n^2 p) time and O(n p) memory.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .kernels import PsdFactor, cholesky_psd, cross_kernel, kernel_matrix

DEGENERATE_GAP = 1e-10


class GramKind(str, enum.Enum):
    GOP = "gop"
    EGCM = "egcm"


@dataclass(frozen=True)
class LowRankGram:
    factor: np.ndarray  # p x m
    kind: GramKind

    def dense(self) -> np.ndarray:
        """Materialize the p x p matrix. For tests and small p only."""
        return self.factor @ self.factor.T


@dataclass(frozen=True)
class SpectralResult:
    eigenvalues: np.ndarray  # descending, nonnegative
    eigenvectors: np.ndarray  # p x k
    kind: GramKind
    degenerate: bool = False  # some adjacent eigenvalues are numerically tied

    @property
    def k(self) -> int:
        return self.eigenvalues.shape[0]


@dataclass(frozen=True)
class EdrEstimate:
    B_hat: np.ndarray  # p x k
    eigenvalues_used: np.ndarray

    @property
    def k(self) -> int:
        return self.B_hat.shape[1]


def gradient_outer_product(model, X_eval=None) -> LowRankGram:
    """``G = (1/m) sum_l f(x_l) f(x_l)^T`` over the evaluation points.

    Defaults to the model's training points.
    """
    X_eval = model.train_points if X_eval is None else np.atleast_2d(np.asarray(X_eval, float))
    if X_eval.shape[1] != model.train_points.shape[1]:
        raise ValueError("evaluation points have the wrong dimension")
    m = X_eval.shape[0]
    grads = model.coefficients @ cross_kernel(model.train_points, X_eval, model.kernel)
    return LowRankGram(grads / np.sqrt(m), GramKind.GOP)


def egcm(model, K_factor: PsdFactor | None = None) -> LowRankGram:
    """Gradient covariance ``C K C^T`` as the factor ``C L``."""
    if K_factor is None:
        K_factor = cholesky_psd(kernel_matrix(model.train_points, model.kernel))
    C = model.coefficients
    if K_factor.L.shape[0] != C.shape[1]:
        raise ValueError(
            f"kernel factor is {K_factor.L.shape[0]}x{K_factor.L.shape[0]} "
            f"but the model has {C.shape[1]} training points"
        )
    return LowRankGram(C @ K_factor.L, GramKind.EGCM)


def _canonical_signs(V: np.ndarray) -> np.ndarray:
    if V.size == 0:
        return V
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def top_eigen(gram: LowRankGram, k_max: int | None = None) -> SpectralResult:
    """Leading eigenpairs of ``F F^T`` from a thin QR of ``F``.

    Eigenvalues below ``max(p, m) * eps * lambda_1`` count as zero and are
    dropped, so the spectrum length is the numerical rank (capped at
    ``k_max``). Each eigenvector's largest-magnitude entry is positive.
    """
    F = np.asarray(gram.factor, dtype=float)
    p, m = F.shape
    k_max = m if k_max is None else k_max
    if k_max < 0 or k_max > m:
        raise ValueError(f"k_max must be in [0, {m}], got {k_max}")
    if m == 0 or not np.any(F):
        return SpectralResult(np.zeros(0), np.zeros((p, 0)), gram.kind)
    Q, R = np.linalg.qr(F, mode="reduced")
    Ur, sv, _ = np.linalg.svd(R)
    vals = sv**2
    cutoff = max(p, m) * np.finfo(float).eps * vals[0]
    keep = min(int(np.sum(vals > cutoff)), k_max)
    vals = vals[:keep]
    vecs = _canonical_signs(Q @ Ur[:, :keep])
    gaps = -np.diff(vals)
    degenerate = bool(np.any(gaps < DEGENERATE_GAP * vals[0])) if keep > 1 else False
    return SpectralResult(vals, vecs, gram.kind, degenerate)


def edr_estimate(spec: SpectralResult, k: int) -> EdrEstimate:
    """Keep the first ``k`` eigenvectors as the estimated predictive subspace."""
    if not 0 <= k <= spec.k:
        raise ValueError(f"k must be in [0, {spec.k}], got {k}")
    return EdrEstimate(spec.eigenvectors[:, :k].copy(), spec.eigenvalues[:k].copy())


def project(X, edr: EdrEstimate) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != edr.B_hat.shape[0]:
        raise ValueError(
            f"data have {X.shape[1]} columns, directions have {edr.B_hat.shape[0]}"
        )
    return X @ edr.B_hat


def trailing_eigenvalue_profile(spec: SpectralResult, k_true: int) -> tuple[float, float]:
    """``(lambda_{k+1} / lambda_k, sum_{l>k} lambda_l / sum_l lambda_l)``.

    Eigenvalues beyond the returned spectrum are zero.
    """
    vals = spec.eigenvalues
    if vals.size == 0:
        raise ValueError("empty spectrum")
    if k_true < 1:
        raise ValueError("k_true must be >= 1")
    lam_k = vals[k_true - 1] if k_true <= vals.size else 0.0
    lam_next = vals[k_true] if k_true < vals.size else 0.0
    ratio = lam_next / lam_k if lam_k > 0 else 0.0
    residual = float(vals[k_true:].sum() / vals.sum())
    return float(ratio), residual

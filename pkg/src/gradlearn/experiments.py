"""Simulation experiments shared by ``scripts/`` and the acceptance tests.

Each function runs one seeded replicate and returns plain numbers.
"""

from __future__ import annotations

import numpy as np

from .classification import fit_gradient_classification
from .data import Dataset
from .kernels import KernelSpec, WeightSpec, default_bandwidths
from .metrics import error_rate, knn_classify, principal_angles
from .regression import fit_gradient_regression, predict_gradient
from .simulate import gen_hypersphere_sim, gen_linear_sim
from .spectral import edr_estimate, egcm, project, top_eigen, trailing_eigenvalue_profile


def _heuristic_fit(data: Dataset, lambda1=1e-4, lambda2=1e-4, kernel_scale=None):
    s, sigma = default_bandwidths(data.X)
    if kernel_scale is not None:
        sigma = kernel_scale * s
    return fit_gradient_classification(data, KernelSpec(sigma), WeightSpec(s), lambda1, lambda2)


def linear_alignment(sigma: float, seed: int, n_per_class: int = 20) -> float:
    """|cos| between the top ESF and the true direction, linear design."""
    data, truth = gen_linear_sim(n_per_class, sigma, seed)
    model = _heuristic_fit(data)
    u = top_eigen(egcm(model), 1).eigenvectors[:, 0]
    return float(abs(u @ truth.directions[:, 0]))


def hypersphere_recovery(seed: int, n_per_class: int = 30, p: int = 200, d: int = 2,
                         r: float = 3.0, sigma: float = 0.2) -> dict:
    """Top-d ESF subspace angle and radius-shell separation."""
    data, truth = gen_hypersphere_sim(n_per_class, p, d, r, sigma, seed)
    model = _heuristic_fit(data)
    edr = edr_estimate(top_eigen(egcm(model), d), d)
    angle = principal_angles(edr.B_hat, truth.directions).max_angle
    radii = np.linalg.norm(project(data.X, edr), axis=1)
    inner = np.percentile(radii[data.y > 0], 95)
    outer = np.percentile(radii[data.y < 0], 5)
    return {"max_angle_deg": float(np.degrees(angle)), "separated": bool(inner < outer),
            "inner_p95": float(inner), "outer_p5": float(outer)}


def linear_residual_mass(n_per_class: int, seed: int, sigma: float = 0.5,
                         lam: float = 1e-2, kernel_scale: float = 1.0) -> float:
    """Fraction of EGCM trace outside the top eigenvalue (one true direction).

    The kernel width is ``kernel_scale`` times the median distance so the
    RKHS smooths across neighbours; with the narrow default width the
    kernel matrix is numerically the identity in 100 dimensions.
    """
    data, _ = gen_linear_sim(n_per_class, sigma, seed)
    model = _heuristic_fit(data, lam, lam, kernel_scale)
    return trailing_eigenvalue_profile(top_eigen(egcm(model)), 1)[1]


_CURVE_AMPLITUDE = np.array([1.0, 1.0, 0.5, 0.5, 0.25, 0.25])


def _curve_frame(ambient: int = 20) -> np.ndarray:
    rng = np.random.default_rng(20_000)
    return np.linalg.qr(rng.standard_normal((ambient, 6)))[0]


def curve_sample(n: int, seed: int, ambient: int = 20, noise: float = 0.0):
    """Points on a smooth arc in R^ambient with response t + sin(t).

    Returns ``(data, true_gradients)``; the true gradient at each point is
    the manifold gradient pushed into R^ambient (tangent to the arc).
    """
    rng = np.random.default_rng(seed)
    Q = _curve_frame(ambient)
    t = np.sort(rng.uniform(0.0, 3.0, n))
    freq = np.repeat([1.0, 2.0, 3.0], 2)
    phase = freq * t[:, None]
    pos = np.where(np.arange(6) % 2 == 0, np.cos(phase), np.sin(phase)) * _CURVE_AMPLITUDE
    vel = np.where(np.arange(6) % 2 == 0, -np.sin(phase), np.cos(phase)) * freq * _CURVE_AMPLITUDE
    X = pos @ Q.T
    T = vel @ Q.T
    y = t + np.sin(t) + noise * rng.standard_normal(n)
    dy_dt = 1.0 + np.cos(t)
    grad = dy_dt[:, None] * T / np.sum(T**2, axis=1, keepdims=True)
    return Dataset(X, y), grad


def curve_direction_error(n: int, seed: int, s0: float = 1.0, lam0: float = 1e-2,
                          kernel_sigma: float = 1.0, noise: float = 0.0) -> float:
    """Mean angle (radians) between estimated and true gradients on the arc.

    Bandwidth and ridge shrink with n as s = s0 n^(-1/9), lambda = lam0 s^4,
    the uniform-measure schedule for a one-dimensional manifold.
    """
    data, grad = curve_sample(n, seed, noise=noise)
    s = s0 * n ** (-1.0 / 9.0)
    model = fit_gradient_regression(data, KernelSpec(kernel_sigma), WeightSpec(s), lam0 * s**4)
    F = predict_gradient(model, data.X)
    cos = np.sum(F * grad, axis=1) / (np.linalg.norm(F, axis=1) * np.linalg.norm(grad, axis=1))
    return float(np.mean(np.arccos(np.clip(cos, -1.0, 1.0))))


def reduced_vs_full_knn(train: Dataset, test: Dataset, k_dims: int = 2, knn_k: int = 5):
    """kNN test error after projecting on the top ESFs, and without projection."""
    model = _heuristic_fit(train)
    edr = edr_estimate(top_eigen(egcm(model), k_dims), k_dims)
    reduced = knn_classify(Dataset(project(train.X, edr), train.y), project(test.X, edr), knn_k)
    full = knn_classify(train, test.X, knn_k)
    return (error_rate(reduced, test.y, "GLFC+kNN", k_dims),
            error_rate(full, test.y, "kNN", train.p))

"""Subspace recovery and classification error metrics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.spatial.distance import cdist

from .data import Dataset

ORTHO_TOL = 1e-8


@dataclass(frozen=True)
class SubspaceReport:
    principal_angles: np.ndarray  # ascending, radians

    @property
    def max_angle(self) -> float:
        return float(self.principal_angles.max(initial=0.0))

    @property
    def alignment(self) -> float:
        return float(np.prod(np.cos(self.principal_angles)))

    def as_dict(self) -> dict:
        return {
            "principal_angles": self.principal_angles.tolist(),
            "max_angle": self.max_angle,
            "max_angle_degrees": float(np.degrees(self.max_angle)),
            "alignment": self.alignment,
        }


@dataclass(frozen=True)
class ErrorReport:
    error_rate: float
    n_test: int
    method_label: str = ""
    dimension_used: int = 0

    @property
    def n_errors(self) -> int:
        return int(round(self.error_rate * self.n_test))

    def as_dict(self) -> dict:
        return {
            "error_rate": self.error_rate,
            "n_errors": self.n_errors,
            "n_test": self.n_test,
            "method_label": self.method_label,
            "dimension_used": self.dimension_used,
        }


def _check_orthonormal(M, name):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"{name} must be a 2-d matrix")
    gram = M.T @ M
    if not np.allclose(gram, np.eye(M.shape[1]), rtol=0, atol=ORTHO_TOL):
        raise ValueError(f"{name} does not have orthonormal columns")
    return M


def principal_angles(A, B) -> SubspaceReport:
    A = _check_orthonormal(A, "A")
    B = _check_orthonormal(B, "B")
    if A.shape[0] != B.shape[0]:
        raise ValueError("subspaces live in different ambient dimensions")
    sv = np.linalg.svd(A.T @ B, compute_uv=False)
    return SubspaceReport(np.sort(np.arccos(np.clip(sv, 0.0, 1.0))))


def knn_classify(train: Dataset, test_points, k: int = 5) -> np.ndarray:
    """Majority vote of the k nearest training points.

    Equal distances go to the lower training index; a tied vote goes to +1.
    """
    if train.n == 0:
        raise ValueError("empty training set")
    if not 1 <= k <= train.n:
        raise ValueError(f"k must be in [1, {train.n}], got {k}")
    test_points = np.atleast_2d(np.asarray(test_points, float))
    dist = cdist(test_points, train.X)
    nearest = np.argsort(dist, axis=1, kind="stable")[:, :k]
    votes = train.y[nearest].sum(axis=1)
    return np.where(votes >= 0, 1, -1)


def error_rate(predicted, actual, method_label: str = "", dimension_used: int = 0) -> ErrorReport:
    predicted = np.asarray(predicted).reshape(-1)
    actual = np.asarray(actual).reshape(-1)
    if predicted.shape != actual.shape:
        raise ValueError(f"length mismatch: {predicted.size} vs {actual.size}")
    n = actual.size
    rate = float(np.count_nonzero(predicted != actual) / n) if n else 0.0
    return ErrorReport(rate, n, method_label, dimension_used)


def loo_error(data: Dataset, method: Callable[[Dataset, np.ndarray], np.ndarray]) -> int:
    """Leave-one-out misclassification count.

    ``method(train, test_points)`` is refit for every held-out point.
    """
    if data.n < 2:
        raise ValueError("leave-one-out needs at least two samples")
    errors = 0
    idx = np.arange(data.n)
    for i in idx:
        train = data.subset(idx[idx != i])
        try:
            pred = np.asarray(method(train, data.X[i : i + 1])).reshape(-1)
        except Exception as exc:
            raise RuntimeError(f"leave-one-out fold {i} failed: {exc}") from exc
        errors += int(pred[0] != data.y[i])
    return errors

"""JSON model archives.

Arrays are stored as nested lists of Python floats, which ``json``
writes in shortest round-trip form, so a loaded model predicts bit-for-bit
what the saved one did.
"""

from __future__ import annotations

import json
from typing import Union

import numpy as np

from .classification import ClassGradientModel
from .errors import DataFormatError
from .kernels import KernelSpec, WeightFactor, WeightSpec
from .regression import GradientModel

SCHEMA_VERSION = 1

Model = Union[GradientModel, ClassGradientModel]


def model_to_dict(model: Model, provenance: dict | None = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kernel": {"family": model.kernel.family, "sigma": model.kernel.sigma},
        "weight": {"s": model.weight.s, "factor": model.weight.factor.value},
        "train_points": model.train_points.tolist(),
        "objective_value": model.objective_value,
        "provenance": provenance or {},
    }
    if isinstance(model, ClassGradientModel):
        doc.update(
            kind="classification",
            alpha=model.alpha.tolist(),
            coefficients=model.grad_coefficients.tolist(),
            lambda1=model.lambda1,
            lambda2=model.lambda2,
            iterations=model.iterations,
            converged=model.converged,
            grad_norm=model.grad_norm,
        )
    else:
        doc.update(kind="regression", coefficients=model.coefficients.tolist(), **{"lambda": model.lam})
    return doc


def model_from_dict(doc: dict) -> Model:
    try:
        if doc["schema_version"] != SCHEMA_VERSION:
            raise DataFormatError(f"unsupported archive schema {doc['schema_version']}")
        kernel = KernelSpec(sigma=doc["kernel"]["sigma"], family=doc["kernel"]["family"])
        weight = WeightSpec(s=doc["weight"]["s"], factor=WeightFactor(doc["weight"]["factor"]))
        X = np.array(doc["train_points"], dtype=float)
        C = np.array(doc["coefficients"], dtype=float).reshape(X.shape[1], X.shape[0])
        if doc["kind"] == "classification":
            return ClassGradientModel(
                alpha=np.array(doc["alpha"], dtype=float),
                grad_coefficients=C,
                train_points=X,
                kernel=kernel,
                weight=weight,
                lambda1=doc["lambda1"],
                lambda2=doc["lambda2"],
                objective_value=doc["objective_value"],
                iterations=doc["iterations"],
                converged=doc["converged"],
                grad_norm=doc.get("grad_norm", float("nan")),
            )
        if doc["kind"] == "regression":
            return GradientModel(C, X, kernel, weight, doc["lambda"], doc["objective_value"])
        raise DataFormatError(f"unknown model kind {doc['kind']!r}")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DataFormatError):
            raise
        raise DataFormatError(f"malformed model archive: {exc}") from exc


def save_model(path, model: Model, provenance: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model, provenance), fh)


def load_model(path) -> Model:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: not a JSON archive ({exc})") from exc
    return model_from_dict(doc)

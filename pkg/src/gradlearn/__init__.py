"""Learning gradients in an RKHS and gradient-based dimension reduction."""

__version__ = "0.1.0"

from .classification import (
    ClassGradientModel,
    fit_gradient_classification,
    predict_class_gradient,
    predict_label,
    predict_logodds,
)
from .data import Dataset
from .kernels import KernelSpec, WeightFactor, WeightSpec, default_bandwidths
from .regression import GradientModel, fit_gradient_regression, predict_gradient
from .spectral import edr_estimate, egcm, gradient_outer_product, project, top_eigen

__all__ = [
    "ClassGradientModel",
    "Dataset",
    "GradientModel",
    "KernelSpec",
    "WeightFactor",
    "WeightSpec",
    "default_bandwidths",
    "edr_estimate",
    "egcm",
    "fit_gradient_classification",
    "fit_gradient_regression",
    "gradient_outer_product",
    "predict_class_gradient",
    "predict_gradient",
    "predict_label",
    "predict_logodds",
    "project",
    "top_eigen",
]

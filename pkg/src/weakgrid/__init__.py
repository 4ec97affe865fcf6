"""Arbitrary-order weak approximation of Markov semigroups by random-grid corrections."""

from .errors import (
    ConfigError,
    EstimationError,
    GridError,
    KernelError,
    RateBoundError,
    TreeError,
    UnknownModelError,
    WeakGridError,
)
from .estimator import EstimateMode, EstimateReport, estimate, gamma_oracle, gamma_sample
from .kernels import ModelSpec, build_kernel
from .models import get_model, list_models, register_model
from .trees import Tree, forest_of, scheme_tree

__all__ = [
    "ConfigError",
    "EstimateMode",
    "EstimateReport",
    "EstimationError",
    "GridError",
    "KernelError",
    "ModelSpec",
    "RateBoundError",
    "Tree",
    "TreeError",
    "UnknownModelError",
    "WeakGridError",
    "build_kernel",
    "estimate",
    "forest_of",
    "gamma_oracle",
    "gamma_sample",
    "get_model",
    "list_models",
    "register_model",
    "scheme_tree",
]

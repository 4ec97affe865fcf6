"""
Exception hierarchy shared by every module of the package.
"""

from __future__ import annotations


class WeakGridError(Exception):
    """Base class for all errors raised by weakgrid."""


class TreeError(WeakGridError, ValueError):
    """Invalid tree, or a branching factor the refinement factor cannot host."""


class GridError(WeakGridError, ValueError):
    """Invalid leaf subset, or a grid that does not line up with its noises."""


class KernelError(WeakGridError):
    """A one-step kernel could not be applied."""


class RateBoundError(KernelError):
    """A PDMP jump rate exceeded the thinning bound."""

    def __init__(self, rate: float, bound: float):
        super().__init__(f"jump rate {rate:.6g} exceeds thinning bound {bound:.6g}")
        self.rate = rate
        self.bound = bound


class ConfigError(WeakGridError, ValueError):
    """Invalid run configuration."""


class UnknownModelError(ConfigError, KeyError):
    """No model registered under the requested id."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown model"


class EstimationError(WeakGridError):
    """A kernel failure while estimating one forest term."""

    def __init__(self, term: str, cause: Exception):
        super().__init__(f"term {term}: {cause}")
        self.term = term
        self.cause = cause


__all__ = [
    "ConfigError",
    "EstimationError",
    "GridError",
    "KernelError",
    "RateBoundError",
    "TreeError",
    "UnknownModelError",
    "WeakGridError",
]

"""
Builtin benchmark problems and the model registry.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import ConfigError, UnknownModelError
from .kernels import ModelSpec

CLOSED_FORM = "closed-form"
HIGH_ORDER_RUN = "high-order-run"

# settings used to produce references that have no closed form
REFERENCE_NU = 5
REFERENCE_N = 5
REFERENCE_SEED = 20240101


@dataclass(frozen=True)
class Reference:
    value: float
    provenance: str
    ci_half_width: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return {"value": self.value, "provenance": self.provenance, "ci_half_width": self.ci_half_width}


@dataclass(frozen=True)
class BuiltinModel:
    id: str
    spec: ModelSpec
    # None until produced by a high-order run
    reference: Reference | None = None
    description: str = ""


def _first(x: np.ndarray) -> np.ndarray:
    return x[:, 0]


def ode_logistic(rate: float = 0.1, x0: float = 0.4, horizon: float = 1.0) -> BuiltinModel:
    """dX = rate (1 - X^2) dt, f(x) = x, X_T = tanh(artanh(X_0) + rate T)."""
    spec = ModelSpec(
        name="ode-logistic",
        dimension=1,
        x0=(x0,),
        horizon=horizon,
        payoff=_first,
        drift=lambda x: rate * (1.0 - x**2),
    )
    reference = Reference(math.tanh(math.atanh(x0) + rate * horizon), CLOSED_FORM)
    return BuiltinModel("ode-logistic", spec, reference, "logistic ODE, payoff x")


def linear_ode(k: float = 1.0, theta: float = 0.5, x0: float = 1.0, horizon: float = 1.0) -> BuiltinModel:
    """dX = k (theta - X) dt, f(x) = x."""
    spec = ModelSpec(
        name="ode-linear",
        dimension=1,
        x0=(x0,),
        horizon=horizon,
        payoff=_first,
        drift=lambda x: k * (theta - x),
    )
    reference = Reference(theta + (x0 - theta) * math.exp(-k * horizon), CLOSED_FORM)
    return BuiltinModel("ode-linear", spec, reference, "mean-reverting linear ODE, payoff x")


def sde_quadratic(k: float = 1.0, sigma: float = 0.2, x0: float = 1.0, horizon: float = 1.0) -> BuiltinModel:
    """dX = -k X^2 dt + sigma X dW, f(x) = x^2."""
    c = 0.5 * sigma**2

    def drift_flow(t: float, x: np.ndarray) -> np.ndarray:
        # exact solution of dx/dt = -k x^2 - c x
        if c == 0.0:
            return x / (1.0 + k * x * t)
        decay = math.exp(-c * t)
        return c * x * decay / (c - k * x * math.expm1(-c * t))

    spec = ModelSpec(
        name="sde-quadratic",
        dimension=1,
        x0=(x0,),
        horizon=horizon,
        payoff=lambda x: x[:, 0] ** 2,
        drift=lambda x: -k * x**2,
        diffusion=lambda x: (sigma * x)[:, :, None],
        noise_dim=1,
        strat_drift=lambda x: -k * x**2 - c * x,
        drift_flow=drift_flow,
        diffusion_flows={0: lambda w, x: x * math.exp(sigma * w)},
    )
    reference = None
    if sigma == 0.0:
        reference = Reference((x0 / (1.0 + k * x0 * horizon)) ** 2, CLOSED_FORM)
    return BuiltinModel("sde-quadratic", spec, reference, "quadratic-drift SDE with linear noise, payoff x^2")


def pdmp_tcp(x0: float = 1.0, horizon: float = 1.0) -> BuiltinModel:
    """TCP window: unit drift, halving at rate x, f(x) = x."""
    if not x0 > 0:
        raise ConfigError("pdmp-tcp needs a positive initial window")
    spec = ModelSpec(
        name="pdmp-tcp",
        dimension=1,
        x0=(x0,),
        horizon=horizon,
        payoff=_first,
        drift=lambda x: np.ones_like(x),
        jump=lambda mark, x: -0.5 * x,
        rate=_first,
        # X_t <= X_0 + t; X_0 e is the bound at the default window
        rate_bound=max(x0 * math.e, x0 + horizon),
        mark_sampler=lambda rng, count: np.zeros(count),
        mark_mass=1.0,
        default_kernel="pdmp",
    )
    return BuiltinModel("pdmp-tcp", spec, None, "TCP window size PDMP, payoff x")


# ───────────────────────────── registry ──────────────────────────────

_REGISTRY: dict[str, Callable[[], BuiltinModel]] = {}


def register_model(model_id: str, factory: Callable[[], BuiltinModel], overwrite: bool = False) -> None:
    if model_id in _REGISTRY and not overwrite:
        raise ConfigError(f"model {model_id!r} is already registered")
    _REGISTRY[model_id] = factory


def get_model(model_id: str) -> BuiltinModel:
    try:
        factory = _REGISTRY[model_id]
    except KeyError:
        raise UnknownModelError(f"unknown model {model_id!r} (available: {', '.join(list_models())})") from None
    return factory()


def list_models() -> list[str]:
    return sorted(_REGISTRY)


for _id, _factory in (
    ("ode-logistic", ode_logistic),
    ("ode-linear", linear_ode),
    ("sde-quadratic", sde_quadratic),
    ("pdmp-tcp", pdmp_tcp),
):
    register_model(_id, _factory)

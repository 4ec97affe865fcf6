"""
One-step kernels Theta(delta, z, x) with a shared-noise contract.

A kernel samples the noises of n fine sub-steps, aggregates a run of fine
noises into the noise of the coarse step they cover, and applies one step.
``apply`` never touches a random generator: all randomness is in the noise,
which is what lets coarse and fine paths share it exactly.

States are float arrays of shape (k, d), one row per path; every callback of
a ModelSpec is vectorized over those rows.
"""

from __future__ import annotations

import abc
import logging
import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .errors import ConfigError, GridError, KernelError, RateBoundError
from .random_grids import Grid

logger = logging.getLogger(__name__)

VectorField = Callable[[np.ndarray], np.ndarray]
Flow = Callable[[float, np.ndarray], np.ndarray]


def as_states(x: Any, dimension: int | None = None) -> np.ndarray:
    """Coerce a point or a batch of points to a float (k, d) array."""
    states = np.atleast_1d(np.asarray(x, dtype=float))
    if states.ndim == 1:
        states = states.reshape(1, -1)
    if states.ndim != 2 or (dimension is not None and states.shape[1] != dimension):
        raise KernelError(f"expected states of shape (k, {dimension}), got {states.shape}")
    return states


def step_size(horizon: float, n: int, level: int) -> float:
    """h_level = T / n**level; every caller goes through here so step lengths agree bitwise."""
    return horizon / n**level


@dataclass(frozen=True)
class ModelSpec:
    """Dynamics, payoff and horizon of one problem."""

    name: str
    dimension: int
    x0: tuple[float, ...]
    horizon: float
    payoff: Callable[[np.ndarray], np.ndarray]
    drift: VectorField
    # (k, d) -> (k, d, m); None for an ODE
    diffusion: Callable[[np.ndarray], np.ndarray] | None = None
    noise_dim: int = 0
    # Ninomiya-Victoir data
    strat_drift: VectorField | None = None
    drift_flow: Flow | None = None
    diffusion_flows: Mapping[int, Flow] = field(default_factory=dict)
    # PDMP data
    jump: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    rate: Callable[[np.ndarray], np.ndarray] | None = None
    rate_bound: float | None = None
    mark_sampler: Callable[[np.random.Generator, int], np.ndarray] | None = None
    mark_mass: float = 1.0
    default_kernel: str = "euler"

    def __post_init__(self) -> None:
        if len(self.x0) != self.dimension:
            raise ConfigError(f"{self.name}: x0 has {len(self.x0)} entries, dimension is {self.dimension}")
        if self.horizon <= 0:
            raise ConfigError(f"{self.name}: horizon must be positive")
        if (self.diffusion is None) != (self.noise_dim == 0):
            raise ConfigError(f"{self.name}: diffusion and noise_dim must be given together")

    @property
    def initial_state(self) -> np.ndarray:
        return np.asarray(self.x0, dtype=float).reshape(1, -1)

    @property
    def is_pdmp(self) -> bool:
        return self.jump is not None

    def diffusion_column(self, j: int) -> VectorField:
        if self.diffusion is None:
            raise KernelError(f"{self.name}: an ODE has no diffusion columns")
        if not 0 <= j < self.noise_dim:
            raise KernelError(f"{self.name}: diffusion column {j} out of range (noise_dim={self.noise_dim})")
        return lambda x: self.diffusion(x)[:, :, j]


class Kernel(abc.ABC):
    """Theta together with its fine-noise sampler and aggregation rule."""

    name: str = "kernel"
    # one-step bias is O(h^{1+alpha})
    alpha: Fraction = Fraction(1)

    def __init__(self, spec: ModelSpec):
        self.spec = spec

    @property
    def horizon(self) -> float:
        return self.spec.horizon

    @property
    def is_deterministic(self) -> bool:
        return False

    @abc.abstractmethod
    def sample_fine(self, delta: float, n: int, rng: np.random.Generator) -> list[Any]:
        """n independent noises for the sub-steps of a step of length delta."""

    @abc.abstractmethod
    def aggregate(self, fines: Sequence[Any]) -> Any:
        """Noise of the coarse step covered by ``fines``."""

    @abc.abstractmethod
    def apply(self, delta: float, z: Any, x: np.ndarray) -> np.ndarray:
        """One step of length delta from every row of x."""

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.spec.name})"


# ─────────────────────────────── Euler ───────────────────────────────


class EulerKernel(Kernel):
    """Euler-Maruyama; with no diffusion this is the explicit Euler ODE step."""

    name = "euler"
    alpha = Fraction(1)

    @property
    def is_deterministic(self) -> bool:
        return self.spec.noise_dim == 0

    def sample_fine(self, delta: float, n: int, rng: np.random.Generator) -> list[np.ndarray]:
        if n < 1 or not delta > 0:
            raise KernelError(f"need delta > 0 and n >= 1, got delta={delta}, n={n}")
        m = self.spec.noise_dim
        if m == 0:
            return [np.empty(0) for _ in range(n)]
        increments = rng.normal(0.0, math.sqrt(delta / n), size=(n, m))
        return list(increments)

    def aggregate(self, fines: Sequence[np.ndarray]) -> np.ndarray:
        if not fines:
            raise KernelError("cannot aggregate an empty noise list")
        if len(fines) == 1:
            return fines[0]
        return np.sum(np.stack(fines), axis=0)

    def apply(self, delta: float, z: np.ndarray, x: np.ndarray) -> np.ndarray:
        spec = self.spec
        out = x + spec.drift(x) * delta
        if spec.diffusion is not None:
            out = out + np.sum(spec.diffusion(x) * z, axis=-1)
        return out


# ───────────────────────── Ninomiya-Victoir ──────────────────────────


@dataclass(frozen=True)
class NVNoise:
    increment: np.ndarray
    flip: bool


def rk4_flow(field_: VectorField, t: float, x: np.ndarray, substeps: int) -> np.ndarray:
    """exp(t V)(x) by classical RK4; t may be negative."""
    h = t / substeps
    for _ in range(substeps):
        k1 = field_(x)
        k2 = field_(x + 0.5 * h * k1)
        k3 = field_(x + 0.5 * h * k2)
        k4 = field_(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return x


class NinomiyaVictoirKernel(Kernel):
    """Splitting scheme composing half drift flows around the diffusion flows."""

    name = "nv"
    alpha = Fraction(2)

    def __init__(self, spec: ModelSpec, substeps: int = 4):
        super().__init__(spec)
        if spec.strat_drift is None and spec.drift_flow is None:
            raise ConfigError(f"{spec.name}: the nv kernel needs a Stratonovich drift or its flow")
        if substeps < 1:
            raise ConfigError("substeps must be >= 1")
        self.substeps = substeps

    def sample_fine(self, delta: float, n: int, rng: np.random.Generator) -> list[NVNoise]:
        if n < 1 or not delta > 0:
            raise KernelError(f"need delta > 0 and n >= 1, got delta={delta}, n={n}")
        m = self.spec.noise_dim
        increments = rng.normal(0.0, math.sqrt(delta / n), size=(n, m))
        flips = rng.integers(0, 2, size=n)
        return [NVNoise(increments[k], bool(flips[k])) for k in range(n)]

    def aggregate(self, fines: Sequence[NVNoise]) -> NVNoise:
        if not fines:
            raise KernelError("cannot aggregate an empty noise list")
        if len(fines) == 1:
            return fines[0]
        return NVNoise(np.sum(np.stack([z.increment for z in fines]), axis=0), fines[0].flip)

    def _drift_flow(self, t: float, x: np.ndarray) -> np.ndarray:
        if self.spec.drift_flow is not None:
            return self.spec.drift_flow(t, x)
        return rk4_flow(self.spec.strat_drift, t, x, self.substeps)

    def _diffusion_flow(self, j: int, w: float, x: np.ndarray) -> np.ndarray:
        flow = self.spec.diffusion_flows.get(j)
        if flow is not None:
            return flow(w, x)
        return rk4_flow(self.spec.diffusion_column(j), w, x, self.substeps)

    def apply(self, delta: float, z: NVNoise, x: np.ndarray) -> np.ndarray:
        order = range(self.spec.noise_dim)
        if z.flip:
            order = reversed(order)
        out = self._drift_flow(0.5 * delta, x)
        for j in order:
            out = self._diffusion_flow(j, float(z.increment[j]), out)
        return self._drift_flow(0.5 * delta, out)


# ──────────────────────────────── PDMP ───────────────────────────────


@dataclass(frozen=True)
class JumpNoise:
    """Candidate jumps of one step: times in [0, duration), marks, acceptance uniforms."""

    duration: float
    times: np.ndarray
    marks: np.ndarray
    uniforms: np.ndarray

    def __len__(self) -> int:
        return len(self.times)


class PDMPKernel(Kernel):
    """Drift step followed by the candidate jumps, thinned against the rate bound."""

    name = "pdmp"
    alpha = Fraction(1)

    def __init__(self, spec: ModelSpec):
        super().__init__(spec)
        if not spec.is_pdmp or spec.rate is None or spec.rate_bound is None or spec.mark_sampler is None:
            raise ConfigError(f"{spec.name}: the pdmp kernel needs jump, rate, rate_bound and mark_sampler")
        if not spec.rate_bound > 0:
            raise ConfigError(f"{spec.name}: rate_bound must be positive")

    def sample_fine(self, delta: float, n: int, rng: np.random.Generator) -> list[JumpNoise]:
        if n < 1 or not delta > 0:
            raise KernelError(f"need delta > 0 and n >= 1, got delta={delta}, n={n}")
        spec = self.spec
        count = int(rng.poisson(spec.mark_mass * spec.rate_bound * delta))
        times = np.sort(rng.uniform(0.0, delta, size=count))
        marks = np.asarray(spec.mark_sampler(rng, count))
        uniforms = rng.random(count)

        sub = delta / n
        slot = np.minimum((times // sub).astype(int), n - 1)
        fines = []
        for k in range(n):
            mask = slot == k
            fines.append(JumpNoise(sub, times[mask] - k * sub, marks[mask], uniforms[mask]))
        return fines

    def aggregate(self, fines: Sequence[JumpNoise]) -> JumpNoise:
        if not fines:
            raise KernelError("cannot aggregate an empty noise list")
        if len(fines) == 1:
            return fines[0]
        offsets = np.cumsum([0.0] + [z.duration for z in fines[:-1]])
        return JumpNoise(
            duration=float(sum(z.duration for z in fines)),
            times=np.concatenate([z.times + off for z, off in zip(fines, offsets, strict=True)]),
            marks=np.concatenate([z.marks for z in fines]),
            uniforms=np.concatenate([z.uniforms for z in fines]),
        )

    def apply(self, delta: float, z: JumpNoise, x: np.ndarray) -> np.ndarray:
        spec = self.spec
        bound = spec.rate_bound
        out = x + spec.drift(x) * delta
        for k in range(len(z)):
            rates = spec.rate(out)
            worst = float(np.max(rates))
            if worst > bound:
                raise RateBoundError(worst, bound)
            accept = z.uniforms[k] <= rates / bound
            if np.any(accept):
                jumped = out + spec.jump(z.marks[k], out)
                out = np.where(accept[:, None], jumped, out)
        return out


# ───────────────────────────── factory ───────────────────────────────

KERNELS: dict[str, type[Kernel]] = {
    EulerKernel.name: EulerKernel,
    NinomiyaVictoirKernel.name: NinomiyaVictoirKernel,
    PDMPKernel.name: PDMPKernel,
}


def build_kernel(name: str | None, spec: ModelSpec) -> Kernel:
    name = name or spec.default_kernel
    try:
        cls = KERNELS[name]
    except KeyError:
        raise ConfigError(f"unknown kernel {name!r} (choose from {', '.join(KERNELS)})") from None
    if spec.is_pdmp != (cls is PDMPKernel):
        wanted = "pdmp" if spec.is_pdmp else "a diffusion kernel (euler or nv)"
        raise ConfigError(f"kernel {name!r} does not fit model {spec.name!r}: it needs {wanted}")
    return cls(spec)


# ──────────────────────────── grid runner ────────────────────────────


def run_on_grid(
    kernel: Kernel,
    g: Grid,
    finest_noises: Sequence[Any],
    x0: Any,
    reference: Grid | None = None,
) -> np.ndarray:
    """Compose ``apply`` along ``g``, each step driven by the aggregate of the finest noises it covers.

    ``finest_noises`` are indexed by the steps of ``reference`` (``g`` itself by default).
    """
    reference = reference or g
    if len(finest_noises) != reference.n_steps:
        raise GridError(f"{len(finest_noises)} noises for a reference grid of {reference.n_steps} steps")
    if (g.resolution, g.n, g.level) != (reference.resolution, reference.n, reference.level):
        raise GridError("grid and reference grid use different units")
    index = {t: i for i, t in enumerate(reference.ticks)}
    if any(t not in index for t in g.ticks):
        raise GridError("grid is not a subgrid of the reference grid")

    x = as_states(x0, kernel.spec.dimension)
    for (a, b), p in zip(g.steps(), g.step_levels, strict=True):
        z = kernel.aggregate(finest_noises[index[a] : index[b]])
        x = kernel.apply(step_size(kernel.horizon, g.n, g.level + p), z, x)
    return x

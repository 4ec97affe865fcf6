"""
Order-nu estimation of E[f(X_T)] by random-grid corrections.

The estimate is the plain n-step scheme plus, for every tree A of the
forest F(T^nu_0) other than the root-only tree, c(A) times the expectation of
the signed correction Gamma^A. One Gamma^A sample is evaluated by a branching
recursion: all 2^{#leaves} coupled paths advance together, sharing every
noise, and each leaf splits the batch into a fine half (sign kept) and a
coarse half (sign flipped).
"""

from __future__ import annotations

import csv
import io
import logging
import math
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Protocol

import numpy as np

from .errors import ConfigError, EstimationError, KernelError
from .kernels import Kernel, as_states, run_on_grid, step_size
from .random_grids import LabeledTree, enumerate_labelings, grid, label_tree, pruned_grid
from .trees import (
    ROOT,
    ForestTerm,
    PruningMode,
    Tree,
    Word,
    as_fraction,
    forest_terms,
    min_order_using,
    scheme_tree,
    split_pruned,
)

logger = logging.getLogger(__name__)

Z_95 = 1.96


# ─────────────────────────── weighted states ─────────────────────────


@dataclass(frozen=True)
class WeightedStateSet:
    states: np.ndarray  # (k, d)
    signs: np.ndarray  # (k,) of +1 / -1

    def __len__(self) -> int:
        return len(self.signs)

    def entries(self) -> list[tuple[np.ndarray, int]]:
        return [(self.states[j], int(self.signs[j])) for j in range(len(self))]

    def signed_payoff(self, payoff: Callable[[np.ndarray], np.ndarray]) -> float:
        values = np.asarray(payoff(self.states), dtype=float)
        return math.fsum(self.signs * values)


# ──────────────────────────── noise feeds ────────────────────────────


class NoiseFeed(Protocol):
    def draw(self, delta: float, n: int) -> list[Any]: ...


class RngFeed:
    """Draws fresh noises from a generator."""

    def __init__(self, kernel: Kernel, rng: np.random.Generator):
        self.kernel = kernel
        self.rng = rng

    def draw(self, delta: float, n: int) -> list[Any]:
        return self.kernel.sample_fine(delta, n, self.rng)


class RecordingFeed(RngFeed):
    """RngFeed that keeps every noise it hands out, in draw order."""

    def __init__(self, kernel: Kernel, rng: np.random.Generator):
        super().__init__(kernel, rng)
        self.recorded: list[Any] = []

    def draw(self, delta: float, n: int) -> list[Any]:
        noises = super().draw(delta, n)
        self.recorded.extend(noises)
        return noises


# ─────────────────────── branching evaluation ────────────────────────


def _require_refinement(n: int) -> None:
    if not isinstance(n, int) or n < 2:
        raise ConfigError(f"refinement factor n must be an integer >= 2, got {n!r}")


def gamma_branch(kernel: Kernel, lt: LabeledTree, x0: Any, feed: NoiseFeed, level: int = 0) -> WeightedStateSet:
    """Evaluate Gamma^A for a labeled tree, drawing noises from ``feed`` in time order.

    Entry j of the result took the coarse branch at the k-th leaf (canonical
    order) exactly when bit k of j is set.
    """
    _require_refinement(lt.n)
    n = lt.n
    horizon = kernel.horizon
    tree = lt.tree

    def plain(states: np.ndarray, delta: float) -> np.ndarray:
        (z,) = feed.draw(delta, 1)
        return kernel.apply(delta, z, states)

    def branch(u: Word, depth: int, states: np.ndarray, signs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        h = step_size(horizon, n, level + depth)
        h_fine = step_size(horizon, n, level + depth + 1)
        if tree.sons(u) == 0:
            fines = feed.draw(h, n)
            coarse = kernel.apply(h, kernel.aggregate(fines), states)
            fine = states
            for z in fines:
                fine = kernel.apply(h_fine, z, fine)
            return np.vstack([fine, coarse]), np.concatenate([signs, -signs])
        previous = -1
        for i, k in enumerate(lt.kappa[u], start=1):
            for _ in range(k - previous - 1):
                states = plain(states, h_fine)
            states, signs = branch(u + (i,), depth + 1, states, signs)
            previous = k
        for _ in range(n - previous - 1):
            states = plain(states, h_fine)
        return states, signs

    start = as_states(x0, kernel.spec.dimension)
    states, signs = branch(ROOT, 0, start, np.ones(len(start), dtype=np.int8))
    return WeightedStateSet(states, signs)


def gamma_sample(
    kernel: Kernel, tree: Tree, n: int, x0: Any, rng: np.random.Generator, level: int = 0
) -> WeightedStateSet:
    """Label ``tree`` at random, then evaluate Gamma^A with fresh noises."""
    _require_refinement(n)
    lt = label_tree(tree, n, rng)
    return gamma_branch(kernel, lt, x0, RngFeed(kernel, rng), level)


def gamma_oracle(
    kernel: Kernel, lt: LabeledTree, x0: Any, finest_noises: Sequence[Any], level: int = 0
) -> WeightedStateSet:
    """Gamma^A by running every pruned grid explicitly; entries ordered as gamma_branch."""
    full = grid(lt, level)
    leaves = lt.tree.leaves
    states = []
    signs = []
    for mask in range(2 ** len(leaves)):
        pruned = {leaves[k] for k in range(len(leaves)) if mask >> k & 1}
        g = pruned_grid(lt, pruned, level)
        states.append(run_on_grid(kernel, g, finest_noises, x0, reference=full))
        signs.append(-1 if len(pruned) % 2 else 1)
    return WeightedStateSet(np.vstack(states), np.asarray(signs, dtype=np.int8))


# ───────────────────────────── statistics ────────────────────────────


class SeedStreams:
    """Independent counter-based generator per (term, sample) pair."""

    def __init__(self, seed: int):
        self.seed = int(seed)

    def generator(self, term_index: int, sample_index: int) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=(term_index, sample_index))
        return np.random.Generator(np.random.Philox(seq))


@dataclass
class RunningStats:
    """Welford accumulator; ``merge`` combines two disjoint sample sets."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def push(self, value: float) -> None:
        self.count += 1
        delta = value - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (value - self.mean)

    def merge(self, other: RunningStats) -> RunningStats:
        if other.count == 0:
            return RunningStats(self.count, self.mean, self.m2)
        if self.count == 0:
            return RunningStats(other.count, other.mean, other.m2)
        total = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / total
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / total
        return RunningStats(total, mean, m2)

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0


@dataclass(frozen=True)
class TermStats:
    name: str
    coefficient: int
    mean: float
    variance: float
    samples: int
    flat_cost: int

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    @property
    def ci_half_width(self) -> float:
        return Z_95 * math.sqrt(self.variance / self.samples) if self.samples else math.inf

    def to_dict(self) -> dict[str, Any]:
        return {
            "tree": self.name,
            "coefficient": self.coefficient,
            "mean": self.mean,
            "std": self.std,
            "samples": self.samples,
            "ci_half_width": self.ci_half_width,
            "flat_cost": self.flat_cost,
        }


class _Sampler:
    """One Monte Carlo integrand: the value of sample i comes from stream (term_index, i)."""

    def __init__(self, value: Callable[[np.random.Generator], float], streams: SeedStreams, term_index: int):
        self.value = value
        self.streams = streams
        self.term_index = term_index

    def chunk(self, bounds: tuple[int, int]) -> RunningStats:
        stats = RunningStats()
        for i in range(*bounds):
            stats.push(self.value(self.streams.generator(self.term_index, i)))
        return stats

    def run(self, start: int, stop: int, workers: int = 1, chunk_size: int = 256) -> RunningStats:
        bounds = [(a, min(a + chunk_size, stop)) for a in range(start, stop, chunk_size)]
        if workers > 1 and len(bounds) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(self.chunk, bounds))
        else:
            parts = [self.chunk(b) for b in bounds]
        total = RunningStats()
        for part in parts:
            total = total.merge(part)
            logger.debug("term %d: %d samples merged", self.term_index, total.count)
        return total


def _plain_value(kernel: Kernel, n: int, x0: Any) -> Callable[[np.random.Generator], float]:
    h0 = step_size(kernel.horizon, n, 0)
    h1 = step_size(kernel.horizon, n, 1)
    start = as_states(x0, kernel.spec.dimension)

    def value(rng: np.random.Generator) -> float:
        x = start
        for z in kernel.sample_fine(h0, n, rng):
            x = kernel.apply(h1, z, x)
        return float(np.sum(kernel.spec.payoff(x)))

    return value


def _correction_value(kernel: Kernel, term: ForestTerm, n: int, x0: Any) -> Callable[[np.random.Generator], float]:
    weight = float(term.coefficient(n))

    def value(rng: np.random.Generator) -> float:
        return weight * gamma_sample(kernel, term.tree, n, x0, rng).signed_payoff(kernel.spec.payoff)

    return value


def _check_samples(samples: int) -> None:
    if samples < 2:
        raise ConfigError(f"need at least 2 samples per term, got {samples}")


def term_estimate(
    kernel: Kernel,
    term: ForestTerm,
    n: int,
    x0: Any,
    samples: int,
    streams: SeedStreams,
    term_index: int = 1,
    workers: int = 1,
    chunk_size: int = 256,
) -> TermStats:
    """Mean and variance of c(A)·Gamma^A f over ``samples`` independent draws."""
    _check_samples(samples)
    term.coefficient(n)
    sampler = _Sampler(_correction_value(kernel, term, n, x0), streams, term_index)
    stats = sampler.run(0, samples, workers, chunk_size)
    return TermStats(term.name, term.coefficient(n), stats.mean, stats.variance, stats.count, term.flat_cost(n))


def base_term_estimate(
    kernel: Kernel,
    n: int,
    x0: Any,
    samples: int,
    streams: SeedStreams,
    workers: int = 1,
    chunk_size: int = 256,
) -> TermStats:
    """The plain n-step scheme on [0, T]."""
    _require_refinement(n)
    _check_samples(samples)
    stats = _Sampler(_plain_value(kernel, n, x0), streams, 0).run(0, samples, workers, chunk_size)
    return TermStats(str(Tree.root()), 1, stats.mean, stats.variance, stats.count, n)


def term_exact(kernel: Kernel, term: ForestTerm, n: int, x0: Any) -> TermStats:
    """c(A)·E[Gamma^A f] for a noise-free kernel, summed over every labeling."""
    if not kernel.is_deterministic:
        raise ConfigError(f"exact evaluation needs a noise-free kernel, {kernel!r} is random")
    feed = RngFeed(kernel, np.random.default_rng(0))
    values = [
        gamma_branch(kernel, lt, x0, feed).signed_payoff(kernel.spec.payoff)
        for lt in enumerate_labelings(term.tree, n)
    ]
    return TermStats(term.name, term.coefficient(n), math.fsum(values), 0.0, len(values), term.flat_cost(n))


def base_term_exact(kernel: Kernel, n: int, x0: Any) -> TermStats:
    if not kernel.is_deterministic:
        raise ConfigError(f"exact evaluation needs a noise-free kernel, {kernel!r} is random")
    _require_refinement(n)
    value = _plain_value(kernel, n, x0)(np.random.default_rng(0))
    return TermStats(str(Tree.root()), 1, value, 0.0, 1, n)


def required_samples(variance: float, epsilon: float, pilot_size: int) -> int:
    # rounding guard: a ratio that is an integer up to fp noise must not gain a sample
    needed = math.ceil(round(Z_95**2 * variance / epsilon**2, 9))
    return max(pilot_size, needed)


def allocate_samples(pilot: Iterable[TermStats], epsilon: float, pilot_size: int) -> dict[str, int]:
    """N_A = max(pilot_size, ceil(1.96^2 V_A / eps^2)) for every pilot term."""
    if not epsilon > 0:
        raise ConfigError(f"epsilon must be positive, got {epsilon}")
    allocation = {}
    for stats in pilot:
        if not math.isfinite(stats.variance):
            raise EstimationError(stats.name, ValueError("pilot variance is not finite"))
        allocation[stats.name] = required_samples(stats.variance, epsilon, pilot_size)
    return allocation


# ──────────────────────────── full estimate ──────────────────────────


@dataclass(frozen=True)
class EstimateMode:
    """Exactly one of: target half-width per term, fixed sample count, exact enumeration."""

    epsilon: float | None = None
    samples: int | None = None
    exact: bool = False

    def __post_init__(self) -> None:
        chosen = sum([self.epsilon is not None, self.samples is not None, self.exact])
        if chosen != 1:
            raise ConfigError("choose exactly one of epsilon, samples or exact")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if self.samples is not None:
            _check_samples(self.samples)

    def to_dict(self) -> dict[str, Any]:
        if self.exact:
            return {"exact": True}
        if self.epsilon is not None:
            return {"epsilon": self.epsilon}
        return {"samples": self.samples}


@dataclass(frozen=True)
class EstimateReport:
    value: float
    ci_half_width: float
    nu: int
    n: int
    model: str
    kernel: str
    seed: int
    alpha: Fraction
    pruning_a: Fraction
    mode: EstimateMode
    terms: list[TermStats]
    dropped: list[str] = field(default_factory=list)

    @property
    def work(self) -> int:
        """Kernel steps charged at the flat per-grid rate."""
        return sum(t.samples * t.flat_cost for t in self.terms)

    def to_dict(self) -> dict[str, Any]:
        return {
            "value": self.value,
            "ci_half_width": self.ci_half_width,
            "nu": self.nu,
            "n": self.n,
            "model": self.model,
            "kernel": self.kernel,
            "seed": self.seed,
            "alpha": str(self.alpha),
            "pruning_a": str(self.pruning_a),
            "mode": self.mode.to_dict(),
            "terms": [t.to_dict() for t in self.terms],
            "dropped": list(self.dropped),
            "work": self.work,
        }


def plan_terms(
    nu: int, n: int, alpha: Fraction, pruning: PruningMode
) -> tuple[list[tuple[int, ForestTerm]], list[ForestTerm]]:
    """(forest index, term) pairs of the corrections to run, and the pruned terms."""
    _require_refinement(n)
    tree = scheme_tree(nu, 0, alpha)
    if tree.max_branching > n:
        raise ConfigError(f"order {nu} needs n >= {tree.max_branching}, got n={n}")
    terms = forest_terms(tree)
    kept, dropped = split_pruned(terms[1:], nu, pruning.exponent)
    kept_names = {t.name for t in kept}
    plan = [(idx, term) for idx, term in enumerate(terms) if idx > 0 and term.name in kept_names]
    return plan, dropped


def estimate(
    kernel: Kernel,
    nu: int,
    n: int,
    mode: EstimateMode,
    seed: int = 0,
    pruning: PruningMode | str = PruningMode.NONE,
    alpha: Any = None,
    pilot_size: int = 1000,
    workers: int = 1,
    chunk_size: int = 256,
    x0: Any = None,
) -> EstimateReport:
    """Order-nu estimate of E[f(X_T)] for ``kernel.spec``."""
    pruning = PruningMode.parse(pruning)
    alpha = kernel.alpha if alpha is None else as_fraction(alpha)
    _check_samples(pilot_size)
    x0 = kernel.spec.initial_state if x0 is None else x0
    plan, dropped = plan_terms(nu, n, alpha, pruning)
    streams = SeedStreams(seed)
    logger.info(
        "%s/%s nu=%d n=%d: %d correction terms, %d pruned", kernel.spec.name, kernel.name, nu, n, len(plan), len(dropped)
    )

    def run(index: int, term: ForestTerm | None) -> TermStats:
        if mode.exact:
            return base_term_exact(kernel, n, x0) if term is None else term_exact(kernel, term, n, x0)

        value = _plain_value(kernel, n, x0) if term is None else _correction_value(kernel, term, n, x0)
        sampler = _Sampler(value, streams, index)
        if mode.samples is not None:
            stats = sampler.run(0, mode.samples, workers, chunk_size)
        else:
            stats = sampler.run(0, pilot_size, workers, chunk_size)
            target = required_samples(stats.variance, mode.epsilon, pilot_size)
            logger.info("term %s: pilot variance %.3g, allocating %d samples", index, stats.variance, target)
            if target > pilot_size:
                stats = stats.merge(sampler.run(pilot_size, target, workers, chunk_size))
        if term is None:
            return TermStats(str(Tree.root()), 1, stats.mean, stats.variance, stats.count, n)
        return TermStats(term.name, term.coefficient(n), stats.mean, stats.variance, stats.count, term.flat_cost(n))

    results = []
    for index, term in [(0, None), *plan]:
        name = str(Tree.root()) if term is None else term.name
        try:
            stats = run(index, term)
        except KernelError as e:
            raise EstimationError(name, e) from e
        logger.info("term %s: mean %.6g ± %.2g (%d samples)", name, stats.mean, stats.ci_half_width, stats.samples)
        results.append(stats)

    return EstimateReport(
        value=math.fsum(t.mean for t in results),
        ci_half_width=math.sqrt(math.fsum(t.ci_half_width**2 for t in results)),
        nu=nu,
        n=n,
        model=kernel.spec.name,
        kernel=kernel.name,
        seed=seed,
        alpha=alpha,
        pruning_a=pruning.exponent,
        mode=mode,
        terms=results,
        dropped=[t.name for t in dropped],
    )


# ────────────────────────── convergence sweeps ───────────────────────

CSV_HEADER = ("nu", "n", "estimate", "ci_half_width", "abs_error", "reference")


@dataclass(frozen=True)
class SweepRow:
    nu: int
    n: int
    estimate: float
    ci_half_width: float
    reference: float

    @property
    def abs_error(self) -> float:
        return abs(self.estimate - self.reference)

    def as_tuple(self) -> tuple:
        return (self.nu, self.n, self.estimate, self.ci_half_width, self.abs_error, self.reference)


def fit_slope(rows: Sequence[SweepRow]) -> float | None:
    """Least-squares slope of log|error| against log(1/n).

    Rows whose error is within 3 half-widths of zero are left out; fewer than
    two usable distinct n give None.
    """
    usable = [r for r in rows if r.abs_error > 0 and r.abs_error >= 3 * r.ci_half_width]
    if len({r.n for r in usable}) < 2:
        return None
    x = np.log([1.0 / r.n for r in usable])
    y = np.log([r.abs_error for r in usable])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


@dataclass(frozen=True)
class SweepResult:
    rows: list[SweepRow]
    slopes: dict[int, float | None]
    reference: float

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in self.rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row.as_tuple()])
        return buffer.getvalue()

    def to_dict(self) -> dict[str, Any]:
        return {
            "reference": self.reference,
            "rows": [dict(zip(CSV_HEADER, row.as_tuple(), strict=True)) for row in self.rows],
            "slopes": {str(nu): slope for nu, slope in self.slopes.items()},
        }


def convergence_sweep(
    kernel: Kernel,
    nus: Sequence[int],
    ns: Sequence[int],
    mode: EstimateMode,
    reference: float,
    seed: int = 0,
    **options: Any,
) -> SweepResult:
    """Estimate over the (nu, n) grid and fit one slope per nu."""
    if len(set(ns)) < 2:
        raise ConfigError("a convergence sweep needs at least two values of n")
    rows = []
    slopes: dict[int, float | None] = {}
    for nu in nus:
        nu_rows = []
        for n in ns:
            try:
                report = estimate(kernel, nu, n, mode, seed=seed, **options)
            except ConfigError as e:
                logger.warning("skipping nu=%d n=%d: %s", nu, n, e)
                continue
            nu_rows.append(SweepRow(nu, n, report.value, report.ci_half_width, reference))
        slopes[nu] = fit_slope(nu_rows)
        if slopes[nu] is None:
            logger.warning("nu=%d: fewer than two usable rows, no slope", nu)
        rows.extend(nu_rows)
    return SweepResult(rows, slopes, reference)


# ─────────────────────────── variance table ──────────────────────────


def variance_table(
    kernel: Kernel,
    nu: int,
    n: int,
    samples: int,
    seed: int = 0,
    alpha: Any = None,
    workers: int = 1,
    chunk_size: int = 256,
) -> list[dict[str, Any]]:
    """Std of c(A)·Gamma^A f for every tree of F(T^nu_0), the root-only row being the plain scheme."""
    alpha = kernel.alpha if alpha is None else as_fraction(alpha)
    plan, _ = plan_terms(nu, n, alpha, PruningMode.NONE)
    streams = SeedStreams(seed)
    x0 = kernel.spec.initial_state
    rows = []
    base = base_term_estimate(kernel, n, x0, samples, streams, workers, chunk_size)
    rows.append({"tree": base.name, "std": base.std, "min_order": 1, "samples": base.samples})
    for index, term in plan:
        try:
            stats = term_estimate(kernel, term, n, x0, samples, streams, index, workers, chunk_size)
        except KernelError as e:
            raise EstimationError(term.name, e) from e
        rows.append(
            {
                "tree": term.name,
                "std": stats.std,
                "min_order": min_order_using(term.tree, alpha, nu_max=nu),
                "samples": stats.samples,
            }
        )
    return rows

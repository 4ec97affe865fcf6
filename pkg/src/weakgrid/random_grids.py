"""
Random trees and the time grids they induce.

Every internal node u of a tree carries an increasing tuple kappa(u) of
indices in {0, …, n-1} telling which of its n sub-intervals are refined
again. Grids are kept exact: times are integers counting the finest possible
step h_{l+depth+1}.
"""

from __future__ import annotations

import bisect
import itertools
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Any

import numpy as np

from .errors import GridError, TreeError
from .trees import ROOT, Tree, Word, coefficient, format_word


def _insert_free(taken: list[int], xi: int) -> int:
    """The xi-th value (0-based) of {0, 1, …} not in the sorted list ``taken``."""
    return xi + sum(1 for i, k in enumerate(taken) if xi + i >= k)


def sample_order_stats(r: int, n: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Uniform draw of 0 <= k_1 < … < k_r < n by successive insertion."""
    if not 1 <= r <= n:
        raise TreeError(f"cannot draw {r} distinct indices out of {n}")
    taken: list[int] = []
    for step in range(1, r + 1):
        xi = int(rng.integers(n - step + 1))
        bisect.insort(taken, _insert_free(taken, xi))
    return tuple(taken)


@dataclass(frozen=True)
class LabeledTree:
    tree: Tree
    n: int
    kappa: Mapping[Word, tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise TreeError(f"refinement factor must be >= 1, got {self.n}")
        labels = {tuple(u): tuple(int(k) for k in ks) for u, ks in self.kappa.items()}
        expected = set(self.tree.internal_nodes)
        if set(labels) != expected:
            missing = sorted(expected - set(labels))
            extra = sorted(set(labels) - expected)
            raise TreeError(
                f"labels must cover exactly the internal nodes of {self.tree} "
                f"(missing {[format_word(u) for u in missing]}, unexpected {[format_word(u) for u in extra]})"
            )
        for u, ks in labels.items():
            if len(ks) != self.tree.sons(u):
                raise TreeError(f"node {format_word(u)} has {self.tree.sons(u)} sons but {len(ks)} labels")
            if any(b <= a for a, b in itertools.pairwise(ks)) or ks[0] < 0 or ks[-1] >= self.n:
                raise TreeError(f"labels of {format_word(u)} must increase within [0, {self.n - 1}]: {ks}")
        object.__setattr__(self, "kappa", MappingProxyType(labels))

    def __hash__(self) -> int:
        return hash((self.tree, self.n, tuple(sorted(self.kappa.items()))))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabeledTree):
            return NotImplemented
        return self.tree == other.tree and self.n == other.n and dict(self.kappa) == dict(other.kappa)

    def to_dict(self) -> dict[str, Any]:
        return {
            "tree": str(self.tree),
            "n": self.n,
            "kappa": {format_word(u): list(ks) for u, ks in sorted(self.kappa.items())},
        }


def label_tree(tree: Tree, n: int, rng: np.random.Generator) -> LabeledTree:
    """Draw independent order statistics for every internal node, canonical order."""
    if tree.max_branching > n:
        raise TreeError(f"{tree} has a node with {tree.max_branching} sons, more than n={n}")
    kappa = {u: sample_order_stats(tree.sons(u), n, rng) for u in tree.internal_nodes}
    return LabeledTree(tree, n, kappa)


def enumerate_labelings(tree: Tree, n: int) -> Iterator[LabeledTree]:
    """Every labeling of ``tree``; there are coefficient(tree, n) of them."""
    coefficient(tree, n)  # rejects n below the branching
    nodes = tree.internal_nodes
    choices = [list(itertools.combinations(range(n), tree.sons(u))) for u in nodes]
    for combo in itertools.product(*choices):
        yield LabeledTree(tree, n, dict(zip(nodes, combo, strict=True)))


def birth_time(lt: LabeledTree, u: Word, level: int = 0) -> Fraction:
    """t_l(u) as a fraction of the horizon T."""
    u = tuple(u)
    if u not in lt.tree:
        raise TreeError(f"{format_word(u)} is not a node of {lt.tree}")
    t = Fraction(0)
    for k in range(1, len(u) + 1):
        t += Fraction(lt.kappa[u[: k - 1]][u[k - 1] - 1], lt.n ** (level + k))
    return t


@dataclass(frozen=True)
class Grid:
    """Exact grid on [0, h_l]: point k sits at ticks[k] * T / n**resolution."""

    ticks: tuple[int, ...]
    n: int
    level: int
    resolution: int

    def __post_init__(self) -> None:
        if len(self.ticks) < 2 or self.ticks[0] != 0 or self.ticks[-1] != self.n ** (self.resolution - self.level):
            raise GridError(f"grid must run from 0 to h_{self.level}")
        if any(b <= a for a, b in itertools.pairwise(self.ticks)):
            raise GridError("grid times must be strictly increasing")

    @property
    def n_steps(self) -> int:
        return len(self.ticks) - 1

    @property
    def times(self) -> tuple[Fraction, ...]:
        unit = Fraction(1, self.n**self.resolution)
        return tuple(t * unit for t in self.ticks)

    @property
    def step_levels(self) -> tuple[int, ...]:
        """p_k with s_k - s_{k-1} = h_{l+p_k}."""
        return tuple(self._level_of(b - a) for a, b in itertools.pairwise(self.ticks))

    def _level_of(self, width: int) -> int:
        p = 0
        while width % self.n == 0 and width > 1:
            width //= self.n
            p += 1
        if width != 1:
            raise GridError(f"increment is not a power of n={self.n}")
        return self.resolution - self.level - p

    def steps(self) -> list[tuple[int, int]]:
        """(start tick, end tick) for every step."""
        return list(itertools.pairwise(self.ticks))

    def issubset(self, other: Grid) -> bool:
        if (self.n, self.level) != (other.n, other.level):
            return False
        scale = self.n ** abs(other.resolution - self.resolution)
        if self.resolution <= other.resolution:
            mine = {t * scale for t in self.ticks}
            return mine <= set(other.ticks)
        return all(t % scale == 0 and t // scale in set(other.ticks) for t in self.ticks)


def _resolution(lt: LabeledTree, level: int) -> int:
    return level + lt.tree.depth + 1


def _check_lambda(lt: LabeledTree, pruned: Iterable[Word]) -> frozenset[Word]:
    pruned = frozenset(tuple(u) for u in pruned)
    bad = pruned - set(lt.tree.leaves)
    if bad:
        raise GridError(f"{sorted(format_word(u) for u in bad)} are not leaves of {lt.tree}")
    return pruned


def _refined_ticks(lt: LabeledTree, u: Word, depth: int, resolution: int, level: int, pruned: frozenset[Word]) -> set[int]:
    # ticks relative to the start of node u's interval, of length h_{level+depth}
    length = lt.n ** (resolution - level - depth)
    if u in pruned:
        return {0, length}
    step = length // lt.n
    ticks = {q * step for q in range(lt.n + 1)}
    for i, k in enumerate(lt.kappa.get(u, ()), start=1):
        ticks.update(k * step + t for t in _refined_ticks(lt, u + (i,), depth + 1, resolution, level, pruned))
    return ticks


def grid(lt: LabeledTree, level: int = 0) -> Grid:
    """G_l(A): uniform grid of step h_{l+1}, each marked interval refined recursively."""
    return pruned_grid(lt, (), level)


def pruned_grid(lt: LabeledTree, pruned: Iterable[Word], level: int = 0) -> Grid:
    """Grid of A minus the leaves in ``pruned``; each pruned leaf keeps one coarse step."""
    lam = _check_lambda(lt, pruned)
    resolution = _resolution(lt, level)
    ticks = _refined_ticks(lt, ROOT, 0, resolution, level, lam)
    return Grid(tuple(sorted(ticks)), lt.n, level, resolution)


def grid_union(lt: LabeledTree, level: int = 0, pruned: Iterable[Word] = ()) -> Grid:
    """Union form: {0, h_l} and t_l(u) + k h_{l+|u|+1} over the unpruned nodes u."""
    lam = _check_lambda(lt, pruned)
    n = lt.n
    resolution = _resolution(lt, level)
    ticks = {0, n ** (resolution - level)}
    for u in lt.tree.words:
        if u in lam:
            continue
        start = birth_time(lt, u, level) * n**resolution
        step = n ** (resolution - level - len(u) - 1)
        ticks.update(int(start) + k * step for k in range(n + 1))
    return Grid(tuple(sorted(ticks)), n, level, resolution)


def format_time(ticks: int, n: int, resolution: int) -> str:
    if ticks == 0:
        return "0"
    p = resolution
    while p > 0 and ticks % n == 0:
        ticks //= n
        p -= 1
    if p == 0:
        return "T" if ticks == 1 else f"{ticks} · T"
    return f"{ticks}/{n}^{p} · T"


def grid_to_json(g: Grid) -> dict[str, Any]:
    return {
        "n": g.n,
        "level": g.level,
        "steps": g.n_steps,
        "times": [format_time(t, g.n, g.resolution) for t in g.ticks],
        "step_levels": list(g.step_levels),
    }

"""
Neveu trees and the combinatorics built on them.

A tree is a finite set of words over the positive integers (the root is the
empty word) that is prefix-closed and sibling-closed. This module builds the
scheme trees that encode which corrections an order-``nu`` approximation
needs, expands them into forests of correction terms and computes the
per-term coefficients, pruning and cost figures.
"""

from __future__ import annotations

import enum
import logging
import math
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import product
from typing import Any

from .errors import TreeError

logger = logging.getLogger(__name__)

Word = tuple[int, ...]
ROOT: Word = ()
EMPTY_SYMBOL = "∅"

RationalLike = int | str | float | Fraction


def as_fraction(value: RationalLike) -> Fraction:
    """Exact rational from an int, a string such as "3/2" or a decimal float."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # repr keeps the decimal the user typed (1.5 -> 3/2, 0.1 -> 1/10)
        return Fraction(repr(value))
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as e:
        raise TreeError(f"not a rational number: {value!r}") from e


def format_word(u: Word) -> str:
    if not u:
        return EMPTY_SYMBOL
    if all(d < 10 for d in u):
        return "".join(str(d) for d in u)
    return ".".join(str(d) for d in u)


def parse_word(text: str) -> Word:
    text = text.strip()
    if text in (EMPTY_SYMBOL, "", "()"):
        return ROOT
    parts = text.split(".") if "." in text else list(text)
    try:
        word = tuple(int(p) for p in parts)
    except ValueError as e:
        raise TreeError(f"invalid Neveu word: {text!r}") from e
    if any(d < 1 for d in word):
        raise TreeError(f"Neveu word digits must be positive: {text!r}")
    return word


def validate_tree(nodes: Iterable[Word]) -> frozenset[Word]:
    """Check the three tree axioms and return the node set."""
    node_set = frozenset(tuple(u) for u in nodes)
    if ROOT not in node_set:
        raise TreeError("a tree must contain the root")
    for u in node_set:
        if any(not isinstance(d, int) or d < 1 for d in u):
            raise TreeError(f"invalid node {u!r}: digits must be positive integers")
        if not u:
            continue
        if u[:-1] not in node_set:
            raise TreeError(f"not prefix-closed: {format_word(u)} has no parent")
        if u[-1] > 1 and u[:-1] + (u[-1] - 1,) not in node_set:
            raise TreeError(f"not sibling-closed: {format_word(u)} has no elder sibling")
    return node_set


@dataclass(frozen=True)
class Tree:
    nodes: frozenset[Word]

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", validate_tree(self.nodes))

    # ───────────────────────────── builders ────────────────────────────

    @classmethod
    def root(cls) -> Tree:
        return cls(frozenset({ROOT}))

    @classmethod
    def from_words(cls, words: Iterable[str | Word]) -> Tree:
        return cls(frozenset(parse_word(w) if isinstance(w, str) else tuple(w) for w in words))

    @classmethod
    def parse(cls, text: str) -> Tree:
        """Inverse of ``str(tree)``: accepts "{∅,1,11,2}" (braces optional)."""
        body = text.strip()
        if body.startswith("{") and body.endswith("}"):
            body = body[1:-1]
        words = [w for w in body.split(",") if w.strip()]
        if not words:
            raise TreeError(f"empty tree literal: {text!r}")
        return cls.from_words(words)

    @classmethod
    def graft(cls, children: Sequence[Tree]) -> Tree:
        """{∅} ∪ 1·children[0] ∪ … ∪ r·children[r-1]."""
        nodes = {ROOT}
        for i, child in enumerate(children, start=1):
            nodes.update((i,) + u for u in child.nodes)
        return cls(frozenset(nodes))

    # ──────────────────────────── structure ────────────────────────────

    @cached_property
    def _sons(self) -> dict[Word, int]:
        sons = dict.fromkeys(self.nodes, 0)
        for u in self.nodes:
            if u:
                parent = u[:-1]
                sons[parent] = max(sons[parent], u[-1])
        return sons

    def sons(self, u: Word = ROOT) -> int:
        """j_u: number of sons of node ``u``."""
        try:
            return self._sons[tuple(u)]
        except KeyError:
            raise TreeError(f"{format_word(tuple(u))} is not a node of {self}") from None

    @cached_property
    def words(self) -> tuple[Word, ...]:
        return tuple(sorted(self.nodes))

    @cached_property
    def leaves(self) -> tuple[Word, ...]:
        """E(T) in canonical (depth-first) order."""
        return tuple(u for u in self.words if self._sons[u] == 0)

    @cached_property
    def internal_nodes(self) -> tuple[Word, ...]:
        return tuple(u for u in self.words if self._sons[u] > 0)

    @cached_property
    def depth(self) -> int:
        return max(len(u) for u in self.nodes)

    @property
    def is_trivial(self) -> bool:
        return len(self.nodes) == 1

    @cached_property
    def leaf_depth_sum(self) -> int:
        return sum(len(u) for u in self.leaves)

    @cached_property
    def max_branching(self) -> int:
        return max(self._sons.values())

    def subtree(self, i: int) -> Tree:
        """T'_i, the subtree rooted at the i-th son of the root."""
        if not 1 <= i <= self.sons(ROOT):
            raise TreeError(f"root of {self} has no son {i}")
        return Tree(frozenset(u[1:] for u in self.nodes if u and u[0] == i))

    @cached_property
    def sort_key(self) -> tuple:
        # children compared from the last son backwards
        j = self.sons(ROOT)
        return (j,) + tuple(self.subtree(i).sort_key for i in range(j, 0, -1))

    # ──────────────────────────── dunders ──────────────────────────────

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self) -> Iterator[Word]:
        return iter(self.words)

    def __contains__(self, u: object) -> bool:
        return u in self.nodes

    def __str__(self) -> str:
        return "{" + ",".join(format_word(u) for u in self.words) + "}"

    def __repr__(self) -> str:
        return f"Tree({self})"


def render_ascii(tree: Tree, labels: dict[Word, str] | None = None) -> str:
    """Draw ``tree`` with box characters, one node per line."""
    labels = labels or {}

    def name(u: Word) -> str:
        text = format_word(u)
        return f"{text} {labels[u]}" if u in labels else text

    lines = [name(ROOT)]

    def walk(u: Word, prefix: str) -> None:
        j = tree.sons(u)
        for i in range(1, j + 1):
            last = i == j
            child = u + (i,)
            lines.append(prefix + ("└── " if last else "├── ") + name(child))
            walk(child, prefix + ("    " if last else "│   "))

    walk(ROOT, "")
    return "\n".join(lines)


# ─────────────────────────── scheme trees ────────────────────────────


def _check_order_params(nu: int, level: int, alpha: Fraction) -> None:
    if not isinstance(nu, int) or nu < 1:
        raise TreeError(f"order nu must be an integer >= 1, got {nu!r}")
    if not isinstance(level, int) or level < 0:
        raise TreeError(f"level must be an integer >= 0, got {level!r}")
    if alpha <= 0:
        raise TreeError(f"alpha must be positive, got {alpha}")


def m_of(level: int, nu: int, alpha: RationalLike = 1) -> int:
    """m(l, nu) = ceil(nu / ((1+alpha) l + alpha)): number of sons plus one."""
    a = as_fraction(alpha)
    _check_order_params(nu, level, a)
    return math.ceil(Fraction(nu) / ((1 + a) * level + a))


def q_of(i: int, level: int, nu: int, alpha: RationalLike = 1) -> int:
    """Order required from the i-th son: nu + ceil(i - (1+alpha)(l+1)(i-1))."""
    if i < 1:
        raise TreeError(f"son index must be >= 1, got {i}")
    a = as_fraction(alpha)
    return nu + math.ceil(i - (1 + a) * (level + 1) * (i - 1))


def termination_index(nu: int, level: int, alpha: RationalLike = 1) -> int:
    """Smallest k >= 0 with nu <= alpha + (1+alpha) l + alpha k."""
    a = as_fraction(alpha)
    return max(0, math.ceil((nu - a - (1 + a) * level) / a))


def scheme_tree(nu: int, level: int = 0, alpha: RationalLike = 1) -> Tree:
    a = as_fraction(alpha)
    _check_order_params(nu, level, a)
    return _scheme_tree(nu, level, a)


@lru_cache(maxsize=None)
def _scheme_tree(nu: int, level: int, alpha: Fraction) -> Tree:
    m = m_of(level, nu, alpha)
    children = [_scheme_tree(q_of(i, level, nu, alpha), level + 1, alpha) for i in range(1, m)]
    return Tree.graft(children)


# ────────────────────────────── forests ──────────────────────────────


def forest_of(tree: Tree) -> list[Tree]:
    """F(T) in canonical order, without duplicates."""
    return list(_forest(tree))


@lru_cache(maxsize=None)
def _forest(tree: Tree) -> tuple[Tree, ...]:
    if tree.is_trivial:
        return (tree,)
    members = {Tree.root()}
    for i in range(1, tree.sons(ROOT) + 1):
        sub = _forest(tree.subtree(i))
        members.update(Tree.graft(combo) for combo in product(sub, repeat=i))
    return tuple(sorted(members, key=lambda t: t.sort_key))


def coefficient(tree: Tree, n: int) -> int:
    """c(A) = prod over nodes of C(n, j_u), exact."""
    if tree.max_branching > n:
        raise TreeError(f"{tree} has a node with {tree.max_branching} sons, more than n={n}")
    return math.prod(math.comb(n, tree.sons(u)) for u in tree.words)


def leaves(tree: Tree) -> tuple[Word, ...]:
    return tree.leaves


def flat_cost(tree: Tree, n: int) -> int:
    """Kernel steps summed over the 2^r pruned grids of ``tree``."""
    if n < 2:
        raise TreeError(f"refinement factor must be >= 2, got {n}")
    r = len(tree.leaves)
    return 2**r * (n + (len(tree) - 1) * (n - 1)) - r * 2 ** (r - 1) * (n - 1)


@dataclass(frozen=True)
class ForestTerm:
    tree: Tree

    @property
    def name(self) -> str:
        return str(self.tree)

    @cached_property
    def branching(self) -> tuple[int, ...]:
        """j_u for every node, canonical order (the coefficient formula)."""
        return tuple(self.tree.sons(u) for u in self.tree.words)

    @property
    def leaf_depth_sum(self) -> int:
        return self.tree.leaf_depth_sum

    @cached_property
    def flat_cost_units(self) -> int:
        """Leading coefficient of flat_cost in n."""
        r = len(self.tree.leaves)
        return 2**r * len(self.tree) - r * 2 ** (r - 1)

    def coefficient(self, n: int) -> int:
        return coefficient(self.tree, n)

    def flat_cost(self, n: int) -> int:
        return flat_cost(self.tree, n)

    def to_dict(self) -> dict[str, Any]:
        return {
            "tree": self.name,
            "coefficient_formula": list(self.branching),
            "leaf_depth_sum": self.leaf_depth_sum,
            "flat_cost_units": self.flat_cost_units,
        }


def forest_terms(tree: Tree) -> list[ForestTerm]:
    return [ForestTerm(t) for t in _forest(tree)]


# ────────────────────────────── pruning ──────────────────────────────


class PruningMode(enum.Enum):
    NONE = "none"
    CONST_SIGMA = "const-sigma"
    ODE = "ode"

    @property
    def exponent(self) -> Fraction:
        return {
            PruningMode.NONE: Fraction(1),
            PruningMode.CONST_SIGMA: Fraction(3, 2),
            PruningMode.ODE: Fraction(2),
        }[self]

    @classmethod
    def parse(cls, value: str | PruningMode) -> PruningMode:
        if isinstance(value, PruningMode):
            return value
        try:
            return cls(value)
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise TreeError(f"unknown pruning mode {value!r} (choose from {choices})") from None


def split_pruned(
    terms: Sequence[ForestTerm], nu: int, a: RationalLike = 1
) -> tuple[list[ForestTerm], list[ForestTerm]]:
    """Partition ``terms`` into (kept, dropped) by (a-1)·leaf_depth_sum >= nu."""
    exponent = as_fraction(a)
    if exponent < 1:
        raise TreeError(f"pruning exponent must be >= 1, got {exponent}")
    kept: list[ForestTerm] = []
    dropped: list[ForestTerm] = []
    for term in terms:
        (dropped if (exponent - 1) * term.leaf_depth_sum >= nu else kept).append(term)
    if dropped:
        logger.debug("Pruned %d of %d terms at a=%s", len(dropped), len(terms), exponent)
    return kept, dropped


def prune_forest(terms: Sequence[ForestTerm], nu: int, a: RationalLike = 1) -> list[ForestTerm]:
    return split_pruned(terms, nu, a)[0]


# ─────────────────────────── diagnostics ─────────────────────────────


def smoothness_requirement(nu: int, alpha: RationalLike = 1, beta: RationalLike = 0, level: int = 0) -> Fraction:
    """k(l, nu): derivatives of the payoff consumed by the error bound."""
    a = as_fraction(alpha)
    b = as_fraction(beta)
    if b < 0:
        raise TreeError(f"beta must be >= 0, got {b}")
    _check_order_params(nu, level, a)
    return _smoothness(nu, level, a, b)


@lru_cache(maxsize=None)
def _smoothness(nu: int, level: int, alpha: Fraction, beta: Fraction) -> Fraction:
    m = m_of(level, nu, alpha)
    best = beta * m
    for i in range(1, m):
        best = max(best, i * _smoothness(q_of(i, level, nu, alpha), level + 1, alpha, beta))
    return best


def min_order_using(tree: Tree, alpha: RationalLike = 1, nu_max: int = 8) -> int | None:
    """Smallest nu <= nu_max whose forest F(T^nu_0) contains ``tree``."""
    a = as_fraction(alpha)
    for nu in range(1, nu_max + 1):
        if tree in _forest(_scheme_tree(nu, 0, a)):
            return nu
    return None

"""Exhaustive exact oracle for tropical mixtures of k star trees.

A decomposition ``D = S_1 (+) ... (+) S_k`` (entrywise max) is described by an
achievement pattern: for every pair, the index of a summand attaining the
maximum.  Given a pattern, each summand is constrained independently:

    p_i + p_j == D_ij   for the pairs it attains,
    p_i + p_j <= D_ij   for every pair,

plus the sign constraints of the regime.  A pattern is feasible iff each of
these small systems is, so feasibility of a summand's pair set is memoised and
is monotone (a subset of an attainable set is attainable).  Patterns are
enumerated as restricted-growth strings (summand labels in order of first
use), which removes the k! relabelling symmetry, and a branch is cut as soon
as the summand it extends becomes infeasible.
"""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .errors import BudgetExceeded, PostconditionViolation, TooFewTaxa
from .linear import Constraint, LinearSystem, solve_linear
from .metric import DissimilarityMap, num_pairs, pairs, to_rational
from .trees import StarTree

SIGN_MODES = ("positive", "nonnegative", "signed")
DEFAULT_BUDGET = 3**10
BUDGET_ENV = "STARTREEMIX_BUDGET"


def default_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    return int(raw) if raw else DEFAULT_BUDGET


@dataclass(frozen=True)
class PointConfiguration:
    """The vectors ``e_i + e_j`` (vertices of the second hypersimplex)."""

    n: int
    points: tuple[tuple[int, ...], ...]
    labels: tuple[tuple[int, int], ...]


def delta2n_points(n: int) -> PointConfiguration:
    if n < 3:
        raise TooFewTaxa(f"need n >= 3, got {n}")
    labels = tuple(pairs(n))
    pts = tuple(tuple(1 if t in (i, j) else 0 for t in range(1, n + 1)) for i, j in labels)
    return PointConfiguration(n, pts, labels)


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    k: int
    sign_mode: str
    witness: tuple[StarTree, ...] | None
    pattern: dict[tuple[int, int], int] | None
    patterns_checked: int
    patterns_total: int

    @property
    def status(self) -> str:
        return "Feasible" if self.feasible else "Infeasible"

    @property
    def patterns_exhausted(self) -> int | None:
        return None if self.feasible else self.patterns_checked


def _star_regime(sign_mode: str) -> str:
    return {"positive": "strict", "nonnegative": "closed", "signed": "signed"}[sign_mode]


@lru_cache(maxsize=None)
def pattern_space_size(m: int, k: int, used: int = 0) -> int:
    """Restricted-growth strings of length ``m`` over ``k`` labels, ``used`` already opened."""
    if m == 0:
        return 1
    total = used * pattern_space_size(m - 1, k, used)
    if used < k:
        total += pattern_space_size(m - 1, k, used + 1)
    return total


class _Engine:
    """Pattern search over a lifted point configuration with heights ``x``."""

    def __init__(self, points, heights, sign_mode):
        if sign_mode not in SIGN_MODES:
            raise ValueError(f"unknown sign mode {sign_mode!r}")
        self.points = [tuple(p) for p in points]
        self.heights = [to_rational(h) for h in heights]
        # solve on integer heights; witnesses are scaled back by 1/scale
        self.scale = math.lcm(*(h.denominator for h in self.heights))
        self.int_heights = [int(h * self.scale) for h in self.heights]
        self.dim = len(self.points[0])
        self.sign_mode = sign_mode
        self.cache: dict[int, tuple[Fraction, ...] | None] = {}

    def system(self, mask: int) -> LinearSystem:
        rows = []
        for idx, (pt, h) in enumerate(zip(self.points, self.int_heights)):
            rows.append(Constraint(pt, "==" if mask >> idx & 1 else "<=", h))
        if self.sign_mode != "signed":
            kind = "<" if self.sign_mode == "positive" else "<="
            for t in range(self.dim):
                rows.append(Constraint(tuple(-1 if s == t else 0 for s in range(self.dim)), kind, 0))
        return LinearSystem(self.dim, tuple(rows))

    def attainable(self, mask: int) -> tuple[Fraction, ...] | None:
        if mask not in self.cache:
            sol = solve_linear(self.system(mask))
            self.cache[mask] = None if sol is None else tuple(Fraction(v) / self.scale for v in sol)
        return self.cache[mask]

    def search(self, k: int, prefix: Sequence[int] = ()) -> tuple[list[int] | None, int]:
        """Depth-first search extending ``prefix``; returns (pattern, patterns accounted)."""
        m = len(self.points)
        masks = [0] * k
        used = 0
        for pos, lab in enumerate(prefix):
            masks[lab] |= 1 << pos
            used = max(used, lab + 1)
        for lab in range(used):
            if self.attainable(masks[lab]) is None:
                return None, pattern_space_size(m - len(prefix), k, used)
        assign = list(prefix)
        checked = 0

        def rec(pos: int, used: int) -> bool:
            nonlocal checked
            if pos == m:
                checked += 1
                return True
            for lab in range(min(used + 1, k)):
                new_used = max(used, lab + 1)
                old = masks[lab]
                masks[lab] = old | 1 << pos
                if self.attainable(masks[lab]) is None:
                    checked += pattern_space_size(m - pos - 1, k, new_used)
                else:
                    assign.append(lab)
                    if rec(pos + 1, new_used):
                        return True
                    assign.pop()
                masks[lab] = old
            return False

        found = rec(len(prefix), used)
        return (assign if found else None), checked


def _prefixes(m: int, k: int, depth: int) -> list[tuple[int, ...]]:
    out = [()]
    for _ in range(min(depth, m)):
        out = [p + (lab,) for p in out for lab in range(min(max(p, default=-1) + 2, k))]
    return out


def _search_prefix(args):
    points, heights, sign_mode, k, prefix = args
    return _Engine(points, heights, sign_mode).search(k, prefix)


def _feasibility_search(
    points, heights, k, sign_mode, budget, threads
) -> tuple[Feasibility, list[int] | None]:
    m = len(points)
    if k < 1:
        raise ValueError("k must be at least 1")
    budget = default_budget() if budget is None else budget
    if k**m > budget:
        raise BudgetExceeded(f"{k}^{m} = {k**m} patterns exceed the budget {budget}")
    total = pattern_space_size(m, k)
    engine = _Engine(points, heights, sign_mode)

    if threads and threads > 1 and m > 1:
        depth = 1
        while len(_prefixes(m, k, depth)) < 4 * threads and depth < m:
            depth += 1
        jobs = [(engine.points, engine.heights, sign_mode, k, p) for p in _prefixes(m, k, depth)]
        checked = 0
        pattern = None
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for pat, count in pool.map(_search_prefix, jobs):
                checked += count
                if pat is not None:
                    pattern = pat
                    break
    else:
        pattern, checked = engine.search(k)

    if pattern is None:
        if checked != total:
            raise PostconditionViolation(f"accounted {checked} of {total} patterns")
        return Feasibility(False, k, sign_mode, None, None, checked, total), None

    used = max(pattern) + 1
    vectors = []
    for lab in range(used):
        mask = sum(1 << pos for pos, l in enumerate(pattern) if l == lab)
        vectors.append(engine.attainable(mask))
    vectors += [vectors[0]] * (k - used)
    for pt, h in zip(engine.points, engine.heights):
        if max(sum(a * b for a, b in zip(v, pt)) for v in vectors) != h:
            raise PostconditionViolation("oracle witness does not reproduce the heights")
    regime = _star_regime(sign_mode)
    witness = tuple(StarTree(v, regime) for v in vectors)
    return Feasibility(True, k, sign_mode, witness, None, checked, total), pattern


def _with_pattern(result, labels) -> Feasibility:
    feas, pattern = result
    if pattern is None:
        return feas
    named = {lab: m + 1 for lab, m in zip(labels, pattern)}
    return Feasibility(
        feas.feasible, feas.k, feas.sign_mode, feas.witness, named,
        feas.patterns_checked, feas.patterns_total,
    )


def k_star_feasible(
    D: DissimilarityMap,
    k: int,
    sign_mode: str = "positive",
    budget: int | None = None,
    threads: int = 1,
) -> Feasibility:
    """Decide exactly whether ``D`` is the entrywise max of ``k`` stars.

    ``budget`` bounds ``k ** C(n,2)``; it defaults to ``$STARTREEMIX_BUDGET`` or
    3^10, which admits n<=6 for k=2, n<=5 for k=3 and n<=4 for k=4.
    """
    labels = pairs(D.n)
    points = [tuple(1 if t in (i, j) else 0 for t in range(1, D.n + 1)) for i, j in labels]
    result = _feasibility_search(points, D.entries, k, sign_mode, budget, threads)
    return _with_pattern(result, labels)


def _taxa_from_length(m: int) -> int:
    n = 3
    while num_pairs(n) < m:
        n += 1
    if num_pairs(n) != m:
        raise ValueError(f"{m} is not a binomial coefficient C(n,2)")
    return n


def secant_membership(
    x: Sequence,
    k: int,
    positivity: bool = True,
    budget: int | None = None,
    threads: int = 1,
) -> Feasibility:
    """Membership of the height vector ``x`` in the k-th tropical secant (max convention).

    The secant is taken of the star-metric cone when ``positivity`` is set and of
    its linear span otherwise.  ``x`` lies in it iff ``k+1`` linear functionals
    ``a`` on the lifted configuration of ``Delta(2,n)`` satisfy ``a.v <= x_v`` for
    every point ``v`` with equality covering all points; the functionals are
    returned as the witness.
    """
    heights = [to_rational(h) for h in x]
    config = delta2n_points(_taxa_from_length(len(heights)))
    result = _feasibility_search(
        config.points, heights, k + 1, "positive" if positivity else "signed", budget, threads
    )
    return _with_pattern(result, config.labels)


@dataclass(frozen=True)
class RankSearch:
    rank: int | None  # None: no k <= k_max works (or budget stopped the search)
    k_max: int
    sign_mode: str
    results: dict[int, Feasibility]
    budget_exceeded_at: int | None = None

    @property
    def above_k_max(self) -> bool:
        return self.rank is None and self.budget_exceeded_at is None


def star_rank_bounds(
    D: DissimilarityMap,
    sign_mode: str = "signed",
    k_max: int = 2,
    budget: int | None = None,
    threads: int = 1,
) -> RankSearch:
    """Smallest ``k`` in ``1..k_max`` with a k-star decomposition, searched upward."""
    results: dict[int, Feasibility] = {}
    for k in range(1, k_max + 1):
        try:
            res = k_star_feasible(D, k, sign_mode, budget, threads)
        except BudgetExceeded:
            return RankSearch(None, k_max, sign_mode, results, budget_exceeded_at=k)
        results[k] = res
        if res.feasible:
            return RankSearch(k, k_max, sign_mode, results)
    return RankSearch(None, k_max, sign_mode, results)


def cut_obstruction(D: DissimilarityMap) -> bool:
    """Two disjoint zero pairs with a positive distance between them.

    Any nonnegative star summand vanishes on all four taxa, so the positive
    cross distance can never be attained by finitely many star metrics.
    """
    zero = [(i, j) for (i, j), v in D.items() if v == 0]
    for (i, j), (k, l) in itertools.combinations(zero, 2):
        if len({i, j, k, l}) == 4 and any(D[a, b] > 0 for a in (i, j) for b in (k, l)):
            return True
    return False

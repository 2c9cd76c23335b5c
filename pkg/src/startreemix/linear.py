"""Exact rational feasibility for small linear systems with strict inequalities.

Equalities are removed by Gaussian substitution; the remaining inequalities
are decided by Fourier-Motzkin elimination in which a combined row is strict
iff either parent is.  Back-substitution then produces a rational witness,
which is checked against every original constraint before it is returned.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import PostconditionViolation
from .metric import to_rational

KINDS = ("<=", "<", "==")


def _exact(v):
    # ints stay ints: integer systems never touch Fraction until back-substitution
    return v if type(v) is int or type(v) is Fraction else to_rational(v)


@dataclass(frozen=True)
class Constraint:
    """``sum(coeffs[i] * x_i)  kind  rhs``."""

    coeffs: tuple[Fraction, ...]
    kind: str
    rhs: Fraction

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown constraint kind {self.kind!r}")
        object.__setattr__(self, "coeffs", tuple(_exact(c) for c in self.coeffs))
        object.__setattr__(self, "rhs", _exact(self.rhs))

    @property
    def strict(self) -> bool:
        return self.kind == "<"

    def holds(self, x: Sequence[Fraction]) -> bool:
        lhs = sum(c * v for c, v in zip(self.coeffs, x) if c)
        if self.kind == "==":
            return lhs == self.rhs
        if self.kind == "<":
            return lhs < self.rhs
        return lhs <= self.rhs


@dataclass(frozen=True)
class LinearSystem:
    nvars: int
    constraints: tuple[Constraint, ...] = ()
    names: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        for c in self.constraints:
            if len(c.coeffs) != self.nvars:
                raise ValueError(
                    f"constraint has {len(c.coeffs)} coefficients, system has {self.nvars} variables"
                )

    def satisfied_by(self, x: Sequence[Fraction]) -> bool:
        return len(x) == self.nvars and all(c.holds(x) for c in self.constraints)


# An internal row: coprime integer coefficients, integer rhs, strictness.
_Row = tuple[tuple[int, ...], int, bool]


def _scaled(coeffs: Sequence, rhs) -> tuple[list[int], int]:
    if type(rhs) is int and all(type(c) is int for c in coeffs):
        return list(coeffs), rhs
    denom = rhs.denominator
    for c in coeffs:
        denom = denom * c.denominator // math.gcd(denom, c.denominator)
    return [int(c * denom) for c in coeffs], int(rhs * denom)


def _normalize(coeffs: Sequence[int], rhs: int, strict: bool) -> _Row | None:
    """Divide by the content; ``None`` for an all-zero row (caller checks the rhs)."""
    g = 0
    for c in coeffs:
        g = math.gcd(g, c)
    if g == 0:
        return None
    g = math.gcd(g, rhs)
    return tuple(c // g for c in coeffs), rhs // g, strict


def _trivially_false(rhs, strict: bool) -> bool:
    return rhs < 0 or (strict and rhs == 0)


def _add_row(table: dict, row: _Row) -> None:
    """Keep only the tightest row per coefficient direction."""
    coeffs, rhs, strict = row
    g = 0
    for c in coeffs:
        g = math.gcd(g, c)
    key = tuple(c // g for c in coeffs)
    bound = Fraction(rhs, g)
    old = table.get(key)
    if old is None or bound < old[0] or (bound == old[0] and strict and not old[1]):
        table[key] = (bound, strict)


def _pick_value(lower, upper) -> Fraction:
    """A point of the interval given by ``(bound, strict)`` pairs (either may be None)."""

    def ok(x):
        if lower is not None and (x < lower[0] or (lower[1] and x == lower[0])):
            return False
        if upper is not None and (x > upper[0] or (upper[1] and x == upper[0])):
            return False
        return True

    if ok(Fraction(0)):
        return Fraction(0)
    if upper is not None and not upper[1]:
        return upper[0]
    if lower is not None and not lower[1]:
        return lower[0]
    if lower is not None and upper is not None:
        return (lower[0] + upper[0]) / 2
    if upper is not None:
        return upper[0] - 1
    return lower[0] + 1


def _fourier_motzkin(rows: list[_Row], nvars: int) -> tuple[Fraction, ...] | None:
    table: dict = {}
    for row in rows:
        _add_row(table, row)
    live = list(range(nvars))
    stages = []  # (var, rows mentioning var) in elimination order
    while live:
        best = None
        for v in live:
            pos = sum(1 for c in table if c[v] > 0)
            neg = sum(1 for c in table if c[v] < 0)
            score = pos * neg - pos - neg
            if best is None or score < best[0]:
                best = (score, v)
        v = best[1]
        live.remove(v)
        pos = [(c, r, s) for c, (r, s) in table.items() if c[v] > 0]
        neg = [(c, r, s) for c, (r, s) in table.items() if c[v] < 0]
        stages.append((v, pos + neg))
        nxt: dict = {}
        for c, (r, s) in table.items():
            if c[v] == 0:
                nxt[c] = (r, s)
        for pc, pr, ps in pos:
            for nc, nr, ns in neg:
                a, b = -nc[v], pc[v]
                coeffs = tuple(a * x + b * y for x, y in zip(pc, nc))
                rhs = a * pr + b * nr
                if not any(coeffs):
                    if _trivially_false(rhs, ps or ns):
                        return None
                    continue
                _add_row(nxt, (coeffs, rhs, ps or ns))
        table = nxt
    for c, (r, s) in table.items():
        if _trivially_false(r, s):
            return None

    x = [Fraction(0)] * nvars
    for v, vrows in reversed(stages):
        lower = upper = None
        for c, r, s in vrows:
            rest = r - sum(c[i] * x[i] for i in range(nvars) if i != v and c[i])
            bound = rest / c[v]
            if c[v] > 0:
                if upper is None or bound < upper[0] or (bound == upper[0] and s):
                    upper = (bound, s)
            else:
                if lower is None or bound > lower[0] or (bound == lower[0] and s):
                    lower = (bound, s)
        x[v] = _pick_value(lower, upper)
    return tuple(x)


def solve_linear(system: LinearSystem) -> tuple[Fraction, ...] | None:
    """Exact witness satisfying every constraint, or ``None`` if the system is empty."""
    n = system.nvars
    eqs = []
    ineqs = []
    for con in system.constraints:
        coeffs, rhs = _scaled(con.coeffs, con.rhs)
        (eqs if con.kind == "==" else ineqs).append((coeffs, rhs, con.strict))

    # Fraction-free substitution: each pivot row fixes x_p in terms of later columns.
    pivots: list[tuple[int, list[int], int]] = []
    while eqs:
        coeffs, rhs, _ = eqs.pop()
        p = next((i for i in range(n) if coeffs[i] != 0), None)
        if p is None:
            if rhs != 0:
                return None
            continue
        if coeffs[p] < 0:
            coeffs, rhs = [-c for c in coeffs], -rhs
        a = coeffs[p]
        pivots.append((p, coeffs, rhs))

        def sub(row, p=p, piv=coeffs, prhs=rhs, a=a):
            c, r, s = row
            b = c[p]
            if b == 0:
                return row
            return [a * x - b * y for x, y in zip(c, piv)], a * r - b * prhs, s

        eqs = [sub(r) for r in eqs]
        ineqs = [sub(r) for r in ineqs]

    pivot_vars = {p for p, _, _ in pivots}
    free = [i for i in range(n) if i not in pivot_vars]
    rows: list[_Row] = []
    for coeffs, rhs, strict in ineqs:
        row = _normalize([coeffs[i] for i in free], rhs, strict)
        if row is None:
            if _trivially_false(rhs, strict):
                return None
            continue
        rows.append(row)
    sol = _fourier_motzkin(rows, len(free))
    if sol is None:
        return None
    x = [Fraction(0)] * n
    for i, v in zip(free, sol):
        x[i] = v
    for p, coeffs, rhs in reversed(pivots):
        rest = rhs - sum(coeffs[i] * x[i] for i in range(n) if i != p and coeffs[i])
        x[p] = Fraction(rest) / coeffs[p]
    x = tuple(x)
    if not system.satisfied_by(x):
        raise PostconditionViolation("linear witness failed verification")
    return x

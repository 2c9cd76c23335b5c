"""Exact dissimilarity maps and the four-point calculus on them.

Entries are stored as :class:`fractions.Fraction` in row-major upper-triangular
order ``(1,2), (1,3), ..., (1,n), (2,3), ..., (n-1,n)``.  Taxa are 1-based
everywhere in the public API.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .errors import BadIndices, LengthMismatch, NegativeEntry, SizeMismatch, TooFewTaxa

Rational = Fraction


def to_rational(value) -> Fraction:
    """Convert ints, Fractions, and decimal or ``p/q`` strings exactly.

    Floats are read through their shortest repr so that ``0.1`` means 1/10.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot read {value!r} as an exact rational")


def num_pairs(n: int) -> int:
    return n * (n - 1) // 2


def pairs(n: int) -> list[tuple[int, int]]:
    """All pairs ``(i, j)`` with ``1 <= i < j <= n`` in storage order."""
    return list(itertools.combinations(range(1, n + 1), 2))


def pair_index(n: int, i: int, j: int) -> int:
    if i == j or not (1 <= i <= n and 1 <= j <= n):
        raise BadIndices(f"bad pair ({i}, {j}) for n={n}")
    if i > j:
        i, j = j, i
    # rows 1..i-1 contribute (n-1) + (n-2) + ... + (n-i+1) entries
    return (i - 1) * n - (i - 1) * i // 2 + (j - i - 1)


@dataclass(frozen=True)
class DissimilarityMap:
    n: int
    entries: tuple[Fraction, ...]

    def __post_init__(self):
        if self.n < 3:
            raise TooFewTaxa(f"need at least 3 taxa, got {self.n}")
        if len(self.entries) != num_pairs(self.n):
            raise LengthMismatch(
                f"n={self.n} needs {num_pairs(self.n)} entries, got {len(self.entries)}"
            )
        for (i, j), v in zip(pairs(self.n), self.entries):
            if v < 0:
                raise NegativeEntry(f"D[{i},{j}] = {v} < 0")

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        if i == j:
            return Fraction(0)
        return self.entries[pair_index(self.n, i, j)]

    def items(self) -> Iterator[tuple[tuple[int, int], Fraction]]:
        return zip(pairs(self.n), self.entries)

    def scale(self, factor) -> "DissimilarityMap":
        factor = to_rational(factor)
        return DissimilarityMap(self.n, tuple(factor * v for v in self.entries))

    def matrix(self) -> list[list[Fraction]]:
        return [[self[i, j] for j in range(1, self.n + 1)] for i in range(1, self.n + 1)]

    def __str__(self) -> str:
        body = ", ".join(str(v) for v in self.entries)
        return f"DissimilarityMap(n={self.n}, [{body}])"


def make_dissimilarity(n: int, entries: Iterable) -> DissimilarityMap:
    """Build a validated map from entries in row-major upper-triangular order."""
    if n < 3:
        raise TooFewTaxa(f"need at least 3 taxa, got {n}")
    values = tuple(to_rational(v) for v in entries)
    return DissimilarityMap(n, values)


def from_matrix(rows: Sequence[Sequence]) -> DissimilarityMap:
    """Build a map from a full square matrix, checking symmetry and zero diagonal."""
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise LengthMismatch("matrix is not square")
    m = [[to_rational(v) for v in r] for r in rows]
    for i in range(n):
        if m[i][i] != 0:
            raise LengthMismatch(f"diagonal entry ({i + 1},{i + 1}) is {m[i][i]}, not 0")
        for j in range(i + 1, n):
            if m[i][j] != m[j][i]:
                raise LengthMismatch(f"matrix not symmetric at ({i + 1},{j + 1})")
    return make_dissimilarity(n, [m[i - 1][j - 1] for i, j in pairs(n)])


def from_function(n: int, f) -> DissimilarityMap:
    """Build the map ``{i,j} -> f(i, j)``."""
    return make_dissimilarity(n, [f(i, j) for i, j in pairs(n)])


def tropical_mix(*maps: DissimilarityMap) -> DissimilarityMap:
    """Entrywise maximum of one or more maps on the same taxa."""
    if not maps:
        raise ValueError("tropical_mix needs at least one map")
    n = maps[0].n
    for m in maps[1:]:
        if m.n != n:
            raise SizeMismatch(f"cannot mix maps on {n} and {m.n} taxa")
    return DissimilarityMap(n, tuple(max(vals) for vals in zip(*(m.entries for m in maps))))


def is_metric(D: DissimilarityMap) -> bool:
    n = D.n
    for i, j, k in itertools.permutations(range(1, n + 1), 3):
        if D[i, j] > D[i, k] + D[k, j]:
            return False
    return True


LABELS = ("ij_kl", "ik_jl", "il_jk")


@dataclass(frozen=True)
class QuartetPairing:
    taxa: tuple[int, int, int, int]
    sum_ij_kl: Fraction
    sum_ik_jl: Fraction
    sum_il_jk: Fraction
    attaining: frozenset[str]

    @property
    def sums(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.sum_ij_kl, self.sum_ik_jl, self.sum_il_jk)

    def split(self) -> tuple[tuple[int, int], tuple[int, int]] | None:
        """The pairing with the strictly smallest sum, i.e. the quartet topology.

        ``None`` when all three sums are equal (star quartet) or the
        four-point condition fails.
        """
        if len(self.attaining) != 2:
            return None
        i, j, k, l = self.taxa
        (missing,) = set(LABELS) - self.attaining
        return {
            "ij_kl": ((i, j), (k, l)),
            "ik_jl": ((i, k), (j, l)),
            "il_jk": ((i, l), (j, k)),
        }[missing]


def quartet_pairing(D: DissimilarityMap, i: int, j: int, k: int, l: int) -> QuartetPairing:
    taxa = (i, j, k, l)
    if len(set(taxa)) != 4 or not all(1 <= t <= D.n for t in taxa):
        raise BadIndices(f"need four distinct taxa in 1..{D.n}, got {taxa}")
    sums = (D[i, j] + D[k, l], D[i, k] + D[j, l], D[i, l] + D[j, k])
    top = max(sums)
    attaining = frozenset(lab for lab, s in zip(LABELS, sums) if s == top)
    return QuartetPairing(taxa, *sums, attaining)


def four_point_violation(D: DissimilarityMap) -> QuartetPairing | None:
    """First 4-subset (lexicographic) whose maximum pair-sum is attained once."""
    for quad in itertools.combinations(range(1, D.n + 1), 4):
        q = quartet_pairing(D, *quad)
        if len(q.attaining) < 2:
            return q
    return None


def is_tree_metric(D: DissimilarityMap) -> bool:
    return is_metric(D) and four_point_violation(D) is None


def star_weights(D: DissimilarityMap) -> tuple[Fraction, ...]:
    """Pendant weights ``(D_ij + D_ik - D_jk)/2`` using the two smallest other taxa."""
    out = []
    for i in range(1, D.n + 1):
        j, k = [t for t in range(1, D.n + 1) if t != i][:2]
        out.append((D[i, j] + D[i, k] - D[j, k]) / 2)
    return tuple(out)


def is_star_metric(D: DissimilarityMap) -> bool:
    if D.n == 3:
        return all(w >= 0 for w in star_weights(D))
    if not is_metric(D):
        return False
    for quad in itertools.combinations(range(1, D.n + 1), 4):
        if len(quartet_pairing(D, *quad).attaining) != 3:
            return False
    return True


def restrict(D: DissimilarityMap, subset: Sequence[int]) -> DissimilarityMap:
    """Induced map on ``subset``, relabelled ``1..len(subset)`` in the given order."""
    subset = list(subset)
    if len(subset) < 3 or len(set(subset)) != len(subset):
        raise BadIndices(f"need at least 3 distinct taxa, got {subset}")
    if not all(1 <= t <= D.n for t in subset):
        raise BadIndices(f"taxa out of range 1..{D.n}: {subset}")
    m = len(subset)
    return DissimilarityMap(m, tuple(D[subset[a - 1], subset[b - 1]] for a, b in pairs(m)))

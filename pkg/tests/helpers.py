"""Random generators shared by the unit and acceptance tests."""
from __future__ import annotations

import random
from fractions import Fraction

from startreemix import DoubleStar, StarTree, WeightedTree, make_dissimilarity


def rational(rng: random.Random, lo: int = 1, hi: int = 16, den: int = 4) -> Fraction:
    return Fraction(rng.randint(lo, hi), den)


def random_star(rng: random.Random, n: int) -> StarTree:
    return StarTree(tuple(rational(rng) for _ in range(n)))


def random_map(rng: random.Random, n: int, hi: int = 40) -> object:
    return make_dissimilarity(n, [Fraction(rng.randint(0, hi), 4) for _ in range(n * (n - 1) // 2)])


def random_tree(rng: random.Random, n: int, multifurcate: float = 0.3) -> WeightedTree:
    """Random tree on leaves 1..n with weights in (0, 4]; some internal nodes get degree > 3."""
    leaves = list(range(1, n + 1))
    rng.shuffle(leaves)
    centre = n + 1
    edges = {(leaves[i], centre) for i in range(3)}
    next_node = n + 2
    for leaf in leaves[3:]:
        inner = sorted({v for e in edges for v in e if v > n})
        if rng.random() < multifurcate:
            edges.add((leaf, rng.choice(inner)))
            continue
        a, b = rng.choice(sorted(edges))
        edges.remove((a, b))
        mid = next_node
        next_node += 1
        edges |= {(a, mid), (mid, b), (leaf, mid)}
    weighted = tuple((a, b, rational(rng)) for a, b in sorted(edges))
    return WeightedTree(n, next_node - n - 1, weighted)


def random_caterpillar5(rng: random.Random) -> WeightedTree:
    """A five-leaf tree with two internal edges: cherries {a,b} and {d,e}, c in the middle."""
    a, b, c, d, e = rng.sample(range(1, 6), 5)
    x, y, z = 6, 7, 8
    edges = ((a, x), (b, x), (x, y), (c, y), (y, z), (d, z), (e, z))
    return WeightedTree(5, 3, tuple((u, v, rational(rng)) for u, v in edges))


def random_i2_double_star(rng: random.Random, n: int) -> DoubleStar:
    """Double star with a two-leaf side whose pendants exceed g (so it lies in the image)."""
    I = tuple(sorted(rng.sample(range(1, n + 1), 2)))
    J = tuple(t for t in range(1, n + 1) if t not in I)
    g = rational(rng, 1, 8)
    pendant = [rational(rng) for _ in range(n)]
    for i in I:
        pendant[i - 1] = g + rational(rng, 1, 8)
    return DoubleStar(I, J, g, tuple(pendant))

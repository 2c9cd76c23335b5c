"""Weighted trees, their path metrics, and exact reconstruction from a tree metric."""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    InvalidTree,
    NotAPartition,
    NotTreeMetric,
    PostconditionViolation,
    WrongSplit,
)
from .metric import (
    DissimilarityMap,
    QuartetPairing,
    four_point_violation,
    from_function,
    is_metric,
    is_star_metric,
    is_tree_metric,
    star_weights,
    to_rational,
)

REGIMES = ("strict", "closed", "signed")


def _check_regime(weights: Iterable[Fraction], regime: str, what: str) -> None:
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    for w in weights:
        if regime == "strict" and w <= 0:
            raise InvalidTree(f"{what} weight {w} must be > 0 in the strict regime")
        if regime == "closed" and w < 0:
            raise InvalidTree(f"{what} weight {w} must be >= 0 in the closed regime")


@dataclass(frozen=True)
class StarTree:
    """Pendant weights ``e_1..e_n`` of a star tree.

    ``regime="signed"`` admits negative weights; those only appear as witnesses
    of the signed feasibility oracle.
    """

    weights: tuple[Fraction, ...]
    regime: str = "strict"

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(to_rational(w) for w in self.weights))
        _check_regime(self.weights, self.regime, "pendant")

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def degenerate(self) -> bool:
        return any(w == 0 for w in self.weights)

    def __str__(self) -> str:
        return "star(" + ",".join(str(w) for w in self.weights) + ")"


def star(*weights, regime: str = "strict") -> StarTree:
    return StarTree(tuple(weights), regime)


def star_metric(S: StarTree) -> DissimilarityMap:
    w = S.weights
    return from_function(S.n, lambda i, j: w[i - 1] + w[j - 1])


@dataclass(frozen=True)
class DoubleStar:
    """Two stars on ``I`` and ``J`` joined by one internal edge of weight ``g``.

    ``pendant`` is indexed by taxon: ``pendant[i-1]`` is the weight at leaf i.
    """

    I: tuple[int, ...]
    J: tuple[int, ...]
    g: Fraction
    pendant: tuple[Fraction, ...]
    regime: str = "strict"

    def __post_init__(self):
        object.__setattr__(self, "I", tuple(sorted(self.I)))
        object.__setattr__(self, "J", tuple(sorted(self.J)))
        object.__setattr__(self, "g", to_rational(self.g))
        object.__setattr__(self, "pendant", tuple(to_rational(w) for w in self.pendant))
        n = len(self.pendant)
        if sorted(self.I + self.J) != list(range(1, n + 1)):
            raise NotAPartition(f"I={self.I}, J={self.J} do not partition 1..{n}")
        if len(self.I) < 2 or len(self.J) < 2:
            raise InvalidTree("both sides of a double star need at least two leaves")
        if self.g <= 0:
            raise InvalidTree(f"internal weight g={self.g} must be > 0")
        _check_regime(self.pendant, self.regime, "pendant")

    @property
    def n(self) -> int:
        return len(self.pendant)

    @property
    def degenerate(self) -> bool:
        return any(w == 0 for w in self.pendant)

    def canonical(self) -> "DoubleStar":
        """Orient so that ``|I| <= |J|``, breaking size ties by the side holding taxon 1."""
        I, J = self.I, self.J
        if len(I) > len(J) or (len(I) == len(J) and J < I):
            I, J = J, I
        return DoubleStar(I, J, self.g, self.pendant, self.regime)


def double_star(I: Sequence[int], g, pendant: Sequence, regime: str = "strict") -> DoubleStar:
    n = len(pendant)
    J = tuple(t for t in range(1, n + 1) if t not in set(I))
    return DoubleStar(tuple(I), J, to_rational(g), tuple(pendant), regime).canonical()


def double_star_metric(DS: DoubleStar) -> DissimilarityMap:
    side = {i: 0 for i in DS.I} | {j: 1 for j in DS.J}
    e = DS.pendant

    def dist(i, j):
        d = e[i - 1] + e[j - 1]
        return d + DS.g if side[i] != side[j] else d

    return from_function(DS.n, dist)


@dataclass(frozen=True)
class WeightedTree:
    """Unrooted tree with leaves ``1..n`` and internal nodes ``n+1..n+internal``."""

    n: int
    internal: int
    edges: tuple[tuple[int, int, Fraction], ...]

    def __post_init__(self):
        edges = tuple((int(u), int(v), to_rational(w)) for u, v, w in self.edges)
        object.__setattr__(self, "edges", edges)
        total = self.n + self.internal
        if len(edges) != total - 1:
            raise InvalidTree(f"{total} nodes need {total - 1} edges, got {len(edges)}")
        adj = self.adjacency()
        for u, v, w in edges:
            if not (1 <= u <= total and 1 <= v <= total) or u == v:
                raise InvalidTree(f"bad edge ({u}, {v})")
            if w < 0:
                raise InvalidTree(f"edge ({u}, {v}) has negative weight {w}")
        seen = {1}
        stack = [1]
        while stack:
            x = stack.pop()
            for y, _ in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        if len(seen) != total:
            raise InvalidTree("tree is not connected")
        for leaf in range(1, self.n + 1):
            if len(adj[leaf]) != 1:
                raise InvalidTree(f"leaf {leaf} has degree {len(adj[leaf])}")
        for node in range(self.n + 1, total + 1):
            if len(adj[node]) < 2:
                raise InvalidTree(f"internal node {node} has degree {len(adj[node])}")

    def adjacency(self) -> dict[int, list[tuple[int, Fraction]]]:
        adj: dict[int, list[tuple[int, Fraction]]] = defaultdict(list)
        for u, v, w in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        return adj

    def internal_edges(self) -> list[tuple[int, int, Fraction]]:
        return [(u, v, w) for u, v, w in self.edges if u > self.n and v > self.n]

    def splits(self) -> dict[frozenset[int], Fraction]:
        """Map each edge to the leaf set on its side away from leaf 1."""
        adj = self.adjacency()
        out: dict[frozenset[int], Fraction] = {}
        for u, v, w in self.edges:
            below = _leaves_beyond(adj, self.n, u, v)
            if 1 in below:
                below = frozenset(range(1, self.n + 1)) - below
            out[below] = out.get(below, Fraction(0)) + w
        return out


def _leaves_beyond(adj, n, frm, to) -> frozenset[int]:
    """Leaves reachable from ``to`` without crossing the edge back to ``frm``."""
    seen = {frm, to}
    stack = [to]
    leaves = set()
    while stack:
        x = stack.pop()
        if x <= n:
            leaves.add(x)
        for y, _ in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return frozenset(leaves)


def star_as_tree(S: StarTree) -> WeightedTree:
    c = S.n + 1
    return WeightedTree(S.n, 1, tuple((i, c, w) for i, w in enumerate(S.weights, start=1)))


def double_star_as_tree(DS: DoubleStar) -> WeightedTree:
    n = DS.n
    left, right = n + 1, n + 2
    edges = [(i, left, DS.pendant[i - 1]) for i in DS.I]
    edges += [(j, right, DS.pendant[j - 1]) for j in DS.J]
    edges.append((left, right, DS.g))
    return WeightedTree(n, 2, tuple(edges))


def tree_metric(T: WeightedTree) -> DissimilarityMap:
    adj = T.adjacency()
    dist: dict[tuple[int, int], Fraction] = {}
    for leaf in range(1, T.n + 1):
        acc = {leaf: Fraction(0)}
        stack = [leaf]
        while stack:
            x = stack.pop()
            for y, w in adj[x]:
                if y not in acc:
                    acc[y] = acc[x] + w
                    stack.append(y)
        for other in range(leaf + 1, T.n + 1):
            dist[leaf, other] = acc[other]
    return from_function(T.n, lambda i, j: dist[i, j])


def canonicalize(T: WeightedTree) -> WeightedTree:
    """Contract zero-weight internal edges, suppress degree-2 nodes, renumber internals.

    Internal nodes are numbered in preorder from leaf 1, visiting subtrees in
    order of their smallest leaf, so isomorphic trees get identical edge lists.
    """
    n = T.n
    nbrs: dict[int, dict[int, Fraction]] = defaultdict(dict)
    for u, v, w in T.edges:
        nbrs[u][v] = w
        nbrs[v][u] = w

    def drop(x, y):
        del nbrs[x][y]
        del nbrs[y][x]

    changed = True
    while changed:
        changed = False
        for x in [x for x in nbrs if x > n]:
            if x not in nbrs:
                continue
            zero = [y for y, w in nbrs[x].items() if y > n and w == 0]
            if zero:
                y = zero[0]
                drop(x, y)
                for z, w in list(nbrs[y].items()):
                    drop(y, z)
                    nbrs[x][z] = w
                    nbrs[z][x] = w
                del nbrs[y]
                changed = True
                continue
            if len(nbrs[x]) == 2:
                (a, wa), (b, wb) = nbrs[x].items()
                drop(x, a)
                drop(x, b)
                del nbrs[x]
                nbrs[a][b] = wa + wb
                nbrs[b][a] = wa + wb
                changed = True

    minleaf: dict[tuple[int, int], int] = {}

    def smallest(frm, to):
        key = (frm, to)
        if key not in minleaf:
            best = to if to <= n else None
            for y in nbrs[to]:
                if y != frm:
                    m = smallest(to, y)
                    best = m if best is None else min(best, m)
            minleaf[key] = best
        return minleaf[key]

    relabel = {i: i for i in range(1, n + 1)}
    edges = []
    (root_child,) = nbrs[1]
    order = [(1, root_child)]
    while order:
        frm, to = order.pop(0)
        if to > n and to not in relabel:
            relabel[to] = n + 1 + sum(1 for k in relabel if k > n)
        edges.append((relabel[frm], relabel[to], nbrs[frm][to]))
        kids = sorted((y for y in nbrs[to] if y != frm), key=lambda y: smallest(to, y))
        order[0:0] = [(to, y) for y in kids]
    internal = len(relabel) - n
    edges = tuple(sorted((min(u, v), max(u, v), w) for u, v, w in edges))
    return WeightedTree(n, internal, edges)


def _cherry(D: dict, active: list[int]) -> tuple[int, int]:
    for a, b in itertools.combinations(active, 2):
        rest = [c for c in active if c not in (a, b)]
        if all(
            D[a, b] + D[c, d] <= min(D[a, c] + D[b, d], D[a, d] + D[b, c])
            for c, d in itertools.combinations(rest, 2)
        ):
            return a, b
    raise NotTreeMetric("no cherry found; input violates the four-point condition")


def reconstruct_tree(D: DissimilarityMap) -> WeightedTree:
    """The unique weighted tree realizing ``D``, by exact cherry reduction.

    Repeatedly pick the first pair paired against every other pair in all
    quartets, hang both on a fresh node, and replace them by that node.
    """
    if not is_tree_metric(D):
        raise NotTreeMetric("input is not a tree metric")
    n = D.n
    dist: dict[tuple[int, int], Fraction] = {}
    for i in range(1, n + 1):
        dist[i, i] = Fraction(0)
        for j in range(i + 1, n + 1):
            dist[i, j] = dist[j, i] = D[i, j]
    active = list(range(1, n + 1))
    nxt = n + 1
    edges = []
    while len(active) > 3:
        a, b = _cherry(dist, active)
        ref = next(c for c in active if c not in (a, b))
        wa = (dist[a, b] + dist[a, ref] - dist[b, ref]) / 2
        wb = dist[a, b] - wa
        u = nxt
        nxt += 1
        dist[u, u] = Fraction(0)
        for c in active:
            if c not in (a, b):
                dist[u, c] = dist[c, u] = (dist[a, c] + dist[b, c] - dist[a, b]) / 2
        edges += [(a, u, wa), (b, u, wb)]
        active = [c for c in active if c not in (a, b)] + [u]
    x, y, z = active
    center = nxt
    edges += [
        (x, center, (dist[x, y] + dist[x, z] - dist[y, z]) / 2),
        (y, center, (dist[x, y] + dist[y, z] - dist[x, z]) / 2),
        (z, center, (dist[x, z] + dist[y, z] - dist[x, y]) / 2),
    ]
    tree = canonicalize(WeightedTree(n, center - n, tuple(edges)))
    if tree_metric(tree) != D:
        raise PostconditionViolation("reconstructed tree does not reproduce the input")
    return tree


@dataclass(frozen=True)
class TopologyClass:
    kind: str  # "Star" | "DoubleStar" | "OtherTree" | "NotTreeMetric"
    star: StarTree | None = None
    double_star: DoubleStar | None = None
    tree: WeightedTree | None = None
    degenerate: bool = False
    violation: QuartetPairing | None = field(default=None, compare=False)


def classify_topology(D: DissimilarityMap) -> TopologyClass:
    """Total classification: Star, DoubleStar, OtherTree, or NotTreeMetric.

    Zero pendant weights are reported through ``degenerate`` and the payload
    is built in the closed regime.
    """
    if not is_metric(D):
        return TopologyClass("NotTreeMetric")
    bad = four_point_violation(D)
    if bad is not None:
        return TopologyClass("NotTreeMetric", violation=bad)
    if is_star_metric(D):
        w = star_weights(D)
        degenerate = any(x == 0 for x in w)
        return TopologyClass(
            "Star", star=StarTree(w, "closed" if degenerate else "strict"), degenerate=degenerate
        )
    tree = reconstruct_tree(D)
    inner = tree.internal_edges()
    if len(inner) == 1:
        (left, right, g), = inner
        adj = tree.adjacency()
        I = _leaves_beyond(adj, tree.n, right, left)
        J = _leaves_beyond(adj, tree.n, left, right)
        pendant = [Fraction(0)] * tree.n
        for u, v, w in tree.edges:
            leaf = min(u, v)
            if leaf <= tree.n:
                pendant[leaf - 1] = w
        degenerate = any(w == 0 for w in pendant)
        ds = DoubleStar(
            tuple(I), tuple(J), g, tuple(pendant), "closed" if degenerate else "strict"
        ).canonical()
        return TopologyClass("DoubleStar", double_star=ds, tree=tree, degenerate=degenerate)
    degenerate = any(w == 0 for u, v, w in tree.edges if min(u, v) <= tree.n)
    return TopologyClass("OtherTree", tree=tree, degenerate=degenerate)


def quartet_edge_weights(
    D: DissimilarityMap, split: tuple[tuple[int, int], tuple[int, int]] = ((1, 2), (3, 4))
) -> tuple[Fraction, tuple[Fraction, Fraction, Fraction, Fraction]]:
    """Internal weight ``g`` and pendant weights ``e_1..e_4`` of a 4-taxon tree metric.

    ``split`` names the pairing ``(ij|kl)``; pendants are returned by taxon.
    """
    if D.n != 4:
        raise ValueError("quartet_edge_weights needs a map on 4 taxa")
    (i, j), (k, l) = split
    if sorted((i, j, k, l)) != [1, 2, 3, 4]:
        raise WrongSplit(f"{split} is not a pairing of 1..4")
    if not is_tree_metric(D):
        raise NotTreeMetric("input is not a tree metric")
    g = (D[i, l] + D[j, k] - D[i, j] - D[k, l]) / 2
    if g < 0:
        raise WrongSplit(f"split {split} gives negative internal weight {g}")
    e = {
        i: (D[i, l] + D[i, k] - 2 * g - D[k, l]) / 2,
        j: (D[j, l] + D[j, k] - 2 * g - D[k, l]) / 2,
        k: (D[i, k] + D[j, k] - 2 * g - D[i, j]) / 2,
        l: (D[i, l] + D[j, l] - 2 * g - D[i, j]) / 2,
    }
    pend = (e[1], e[2], e[3], e[4])
    side = {i: 0, j: 0, k: 1, l: 1}
    rebuilt = from_function(
        4, lambda a, b: pend[a - 1] + pend[b - 1] + (g if side[a] != side[b] else 0)
    )
    if rebuilt != D:
        raise WrongSplit(f"D is not a tree with split {split}")
    return g, pend


def cut_metric(blocks: Sequence[Iterable[int]]) -> DissimilarityMap:
    """0 within blocks, 1 across; blocks must partition ``1..n``."""
    blocks = [frozenset(b) for b in blocks]
    members = [t for b in blocks for t in b]
    n = len(members)
    if any(len(b) == 0 for b in blocks) or sorted(members) != list(range(1, n + 1)):
        raise NotAPartition(f"{[sorted(b) for b in blocks]} is not a partition of 1..{n}")
    where = {t: idx for idx, b in enumerate(blocks) for t in b}
    return from_function(n, lambda i, j: 0 if where[i] == where[j] else 1)

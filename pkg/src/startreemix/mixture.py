"""Deciding and parametrizing tropical mixtures of two star trees.

A non-star tree metric is the entrywise max of two star metrics only when it
has a single internal edge; the pendant weights on the small side (both sides
for four taxa) must exceed the internal weight.  Over such a tree the fiber is
a union of two-parameter families ``(u, w) -> (D, Dbar)``, tabulated in
:mod:`startreemix.cases` for the reference labelling and relabelled here.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .cases import TABLES, Affine, CaseTable
from .errors import (
    NotInImage,
    OutOfDomain,
    PostconditionViolation,
    SizeMismatch,
    StarInput,
)
from .metric import DissimilarityMap, to_rational, tropical_mix
from .oracle import Feasibility, k_star_feasible
from .trees import DoubleStar, StarTree, classify_topology, star_metric

ONE_SIDE = ("1.1", "1.2", "1.3", "1.4")
OTHER_SIDE = ("2.1", "2.2", "2.3", "2.4")


def _pos(x: Fraction) -> Fraction:
    return x if x > 0 else Fraction(0)


@dataclass(frozen=True)
class Offsets:
    """Differences between corresponding pair sums of two stars on four taxa."""

    s: Fraction
    t: Fraction
    x: Fraction
    y: Fraction
    u: Fraction
    w: Fraction

    def as_tuple(self) -> tuple[Fraction, ...]:
        return (self.s, self.t, self.x, self.y, self.u, self.w)


def offsets_from_stars(D: StarTree, Dbar: StarTree) -> Offsets:
    if D.n != 4 or Dbar.n != 4:
        raise SizeMismatch("offsets are defined for stars on four taxa")
    a, d, c, e = D.weights
    ab, db, cb, eb = Dbar.weights
    return Offsets(
        s=(ab + cb) - (a + c),
        t=(db + eb) - (d + e),
        x=(ab + eb) - (a + e),
        y=(db + cb) - (d + c),
        u=(ab + db) - (a + d),
        w=(cb + eb) - (c + e),
    )


def quartet_is_12_34(o: Offsets) -> bool:
    """Whether the mixture of the two stars is a tree with split (12|34)."""
    st = _pos(o.s) + _pos(o.t)
    return _pos(o.u) + _pos(o.w) < st and st == _pos(o.x) + _pos(o.y)


@dataclass(frozen=True)
class CaseFamily:
    """One two-parameter family of the fiber, instantiated on a concrete tree.

    ``order[r-1]`` is the taxon playing reference role ``r``: the small side
    of the split fills roles 1 and 2, the other side fills ``3..n``.  The
    family implicitly includes its mate under swapping the two stars.
    """

    case_id: str
    order: tuple[int, ...]
    g: Fraction
    ref_pendant: tuple[Fraction, ...]
    regime: str = "strict"
    orbit: bool = True

    @property
    def n(self) -> int:
        return len(self.order)

    @property
    def table(self) -> CaseTable:
        return TABLES[self.case_id]

    @property
    def env(self) -> dict[str, Fraction]:
        env = {"g": self.g}
        for r, e in enumerate(self.ref_pendant, start=1):
            env[f"e{r}"] = e
        return env

    def _role(self, r: int) -> str:
        if r <= 2 or self.table.side == 2:
            return str(r)
        return "j"

    def _instantiate(self, text: str, r: int | None = None) -> Affine:
        form = Affine.parse(text)
        if r is not None:
            form = form.rename("ej", f"e{r}")
        return form.substitute(self.env)

    def constraints(self) -> list[tuple[Affine, bool, str]]:
        """Domain as ``(affine form in u, w, strict, source formula)``; form > 0 or >= 0."""
        out = []
        for text, strict in self.table.domain:
            if "ej" in text:
                for r in range(3, self.n + 1):
                    out.append((self._instantiate(text, r), strict, text.replace("ej", f"e{r}")))
            else:
                out.append((self._instantiate(text), strict, text))
        return out

    def weight_forms(self) -> tuple[list[Affine], list[Affine]]:
        """Affine forms in ``(u, w)`` for both stars, in reference order."""
        first, second = [], []
        for r in range(1, self.n + 1):
            role = self._role(r)
            first.append(self._instantiate(self.table.first[role], r))
            second.append(self._instantiate(self.table.second[role], r))
        return first, second

    def contains(self, u, w, closed: bool = False) -> bool:
        env = {"u": to_rational(u), "w": to_rational(w)}
        for form, strict, _ in self.constraints():
            v = form.value(env)
            if v < 0 or (v == 0 and strict and not closed):
                return False
        return True

    def stars(self, u, w, regime: str | None = None) -> tuple[StarTree, StarTree]:
        """Both stars at ``(u, w)``, relabelled to the original taxa (no domain check)."""
        env = {"u": to_rational(u), "w": to_rational(w)}
        first, second = self.weight_forms()
        a = [Fraction(0)] * self.n
        b = [Fraction(0)] * self.n
        for r, taxon in enumerate(self.order):
            a[taxon - 1] = first[r].value(env)
            b[taxon - 1] = second[r].value(env)
        regime = regime or self.regime
        return StarTree(tuple(a), regime), StarTree(tuple(b), regime)

    def interval(self, var: str, other: Fraction | None = None):
        """Range of ``var`` as ``((lo, lo_strict), (hi, hi_strict))``; ``None`` if unbounded.

        Without ``other`` only the constraints free of the other parameter count.
        """
        partner = "w" if var == "u" else "u"
        lo = hi = None
        for form, strict, _ in self.constraints():
            a = form.coeff(var)
            if a == 0:
                continue
            if other is None:
                if form.coeff(partner) != 0:
                    continue
                rest = form.coeff("")
            else:
                rest = form.substitute({partner: other}).coeff("")
            bound = -rest / a
            if a > 0:
                if lo is None or bound > lo[0] or (bound == lo[0] and strict):
                    lo = (bound, strict)
            else:
                if hi is None or bound < hi[0] or (bound == hi[0] and strict):
                    hi = (bound, strict)
        return lo, hi

    def grid(self, m: int = 5) -> list[tuple[Fraction, Fraction]]:
        """An ``m x m`` grid strictly inside the parameter polygon (empty if it is)."""
        outer = self.table.outer
        inner = "w" if outer == "u" else "u"
        lo, hi = self.interval(outer)
        if lo is None or hi is None:
            raise PostconditionViolation(f"case {self.case_id}: {outer} range is unbounded")
        pts = []
        for i in range(1, m + 1):
            ov = lo[0] + (hi[0] - lo[0]) * i / (m + 1)
            ilo, ihi = self.interval(inner, ov)
            if ov <= lo[0] or ov >= hi[0] or ilo is None or ihi is None or ilo[0] >= ihi[0]:
                return []
            for j in range(1, m + 1):
                iv = ilo[0] + (ihi[0] - ilo[0]) * j / (m + 1)
                pts.append((ov, iv) if outer == "u" else (iv, ov))
        return pts

    def describe(self) -> dict:
        first, second = self.weight_forms()
        out = {
            "id": self.case_id,
            "orbit": self.orbit,
            "reference_order": list(self.order),
            "constraints": [
                {"formula": f"{src} {'>' if strict else '>='} 0", "instantiated": str(form),
                 "strict": strict}
                for form, strict, src in self.constraints()
            ],
            "weights": {
                "first": {str(t): str(first[r]) for r, t in enumerate(self.order)},
                "second": {str(t): str(second[r]) for r, t in enumerate(self.order)},
            },
        }
        for var in ("u", "w"):
            lo, hi = self.interval(var)
            out[var] = {
                "lower": None if lo is None else str(lo[0]),
                "lower_open": None if lo is None else lo[1],
                "upper": None if hi is None else str(hi[0]),
                "upper_open": None if hi is None else hi[1],
                "depends_on_other": any(
                    form.coeff("u") != 0 and form.coeff("w") != 0
                    for form, _, _ in self.constraints()
                ),
            }
        return out


def _side_ok(weights: Sequence[Fraction], g: Fraction, regime: str) -> bool:
    if regime == "closed":
        return all(e >= g for e in weights)
    return all(e > g for e in weights)


def _families(ds: DoubleStar, regime: str) -> tuple[list[str], tuple[int, ...], tuple[Fraction, ...]]:
    order = ds.I + ds.J
    ref = tuple(ds.pendant[t - 1] for t in order)
    ids = []
    if _side_ok(ref[:2], ds.g, regime) and len(ds.I) == 2:
        ids += ONE_SIDE
    if ds.n == 4 and _side_ok(ref[2:], ds.g, regime):
        ids += OTHER_SIDE
    return ids, order, ref


@dataclass(frozen=True)
class MixtureDecision:
    verdict: str  # "Yes" | "No"
    basis: str
    families: tuple[str, ...] = ()
    provenance: str = "TheoremOnly"
    witness: tuple[StarTree, StarTree] | None = None
    theorem_verdict: str | None = None
    oracle_verdict: str | None = None
    oracle: Feasibility | None = field(default=None, compare=False)
    note: str = ""
    regime: str = "strict"

    @property
    def yes(self) -> bool:
        return self.verdict == "Yes"


def decide_two_star_mixture(
    D: DissimilarityMap,
    cross_check: bool = False,
    regime: str = "strict",
    budget: int | None = None,
    threads: int = 1,
) -> MixtureDecision:
    """Is the tree metric ``D`` a tropical mixture of two star trees?

    ``regime="strict"`` asks for positive pendant weights and uses the strict
    inequalities; ``"closed"`` admits zero weights and relaxes them to ``>=``.
    Non-tree-metrics are answered No outright.  With ``cross_check`` the exact
    oracle also runs (tree metrics only) and its verdict wins.
    """
    if regime not in ("strict", "closed"):
        raise ValueError(f"unknown regime {regime!r}")
    topo = classify_topology(D)
    witness = None
    families: tuple[str, ...] = ()
    note = ""

    if topo.kind == "NotTreeMetric":
        return MixtureDecision("No", "TopologyExcluded", theorem_verdict="No",
                               note="not a tree metric", regime=regime)
    if topo.kind == "Star":
        if topo.degenerate and regime == "strict":
            verdict, basis = "No", "WeightConditionFailed"
            note = "star metric with a zero pendant weight is not a mixture of positive stars"
        else:
            verdict, basis = "Yes", "StarTrivial"
            witness = (topo.star, topo.star)
    elif topo.kind == "OtherTree":
        verdict, basis = "No", "TopologyExcluded"
        note = "more than one internal edge"
    else:
        ds = topo.double_star
        if topo.degenerate and regime == "strict":
            verdict, basis = "No", "WeightConditionFailed"
            note = "zero pendant weight in the strict regime"
        elif ds.n == 4 or len(ds.I) == 2:
            ids, order, ref = _families(ds, regime)
            families = tuple(ids)
            if ids:
                verdict, basis = "Yes", ("Quartet" if ds.n == 4 else "DoubleStarI2")
                fam = CaseFamily(ids[0], order, ds.g, ref, regime)
                pts = fam.grid(1)
                if pts:
                    witness = fam.stars(*pts[0])
            else:
                verdict, basis = "No", "WeightConditionFailed"
        else:
            ok = _side_ok(ds.pendant, ds.g, regime)
            verdict = "Yes" if ok else "No"
            basis = "DoubleStarI3plus" if ok else "WeightConditionFailed"
            note = "both sides have at least three leaves; verdict not constructive"

    theorem_verdict = verdict
    if not cross_check:
        return MixtureDecision(verdict, basis, families, "TheoremOnly", witness,
                               theorem_verdict, None, None, note, regime)

    sign = "positive" if regime == "strict" else "nonnegative"
    res = k_star_feasible(D, 2, sign, budget=budget, threads=threads)
    oracle_verdict = "Yes" if res.feasible else "No"
    if oracle_verdict != theorem_verdict:
        note = (note + "; " if note else "") + (
            f"oracle disagrees with the rule-based verdict ({oracle_verdict} vs {theorem_verdict}) "
            f"after {res.patterns_checked} of {res.patterns_total} patterns"
        )
        verdict = oracle_verdict
        if verdict == "No":
            families = ()
            witness = None
    if verdict == "Yes" and witness is None:
        witness = res.witness
    return MixtureDecision(verdict, basis, families, "OracleConfirmed", witness,
                           theorem_verdict, oracle_verdict, res, note, regime)


def _double_star_of(T: DissimilarityMap, regime: str) -> DoubleStar:
    topo = classify_topology(T)
    if topo.kind == "Star":
        raise StarInput("the fiber over a star metric is not parametrized by case families")
    decision = decide_two_star_mixture(T, regime=regime)
    if not decision.yes:
        raise NotInImage(f"not a mixture of two stars ({decision.basis})")
    if topo.double_star.n > 4 and len(topo.double_star.I) > 2:
        raise NotInImage("no case families exist when both sides have three or more leaves")
    return topo.double_star


def enumerate_fiber_cases(T: DissimilarityMap, regime: str = "strict") -> list[CaseFamily]:
    """The admissible case families over ``T``, each standing for itself and its swap."""
    ds = _double_star_of(T, regime)
    ids, order, ref = _families(ds, regime)
    return [CaseFamily(cid, order, ds.g, ref, regime) for cid in ids]


def verify_decomposition(
    T: DissimilarityMap, D: StarTree, Dbar: StarTree, regime: str = "strict"
) -> bool:
    if not (T.n == D.n == Dbar.n):
        raise SizeMismatch(f"sizes {T.n}, {D.n}, {Dbar.n} differ")
    for s in (D, Dbar):
        if regime == "strict" and any(w <= 0 for w in s.weights):
            return False
        if regime == "closed" and any(w < 0 for w in s.weights):
            return False
    return tropical_mix(star_metric(D), star_metric(Dbar)) == T


def sample_decomposition(
    T: DissimilarityMap,
    case_id: str,
    u,
    w,
    regime: str = "strict",
    swap: bool = False,
) -> tuple[StarTree, StarTree]:
    """The two stars of family ``case_id`` at parameters ``(u, w)``.

    In the strict regime ``(u, w)`` must satisfy the family's constraints as
    stated (open bounds stay open); the closed regime accepts the closure and
    may return degenerate stars.
    """
    u, w = to_rational(u), to_rational(w)
    fams = {f.case_id: f for f in enumerate_fiber_cases(T, regime)}
    if case_id not in fams:
        raise OutOfDomain(f"case {case_id} is not admissible here; admissible: {sorted(fams)}")
    fam = fams[case_id]
    if not fam.contains(u, w, closed=(regime == "closed")):
        raise OutOfDomain(f"(u, w) = ({u}, {w}) lies outside case {case_id}")
    D, Dbar = fam.stars(u, w, regime="closed" if regime == "closed" else "signed")
    D, Dbar = StarTree(D.weights, "closed"), StarTree(Dbar.weights, "closed")
    if not verify_decomposition(T, D, Dbar, regime):
        raise PostconditionViolation(f"case {case_id} at ({u}, {w}) does not reproduce T")
    if regime == "strict":
        D, Dbar = StarTree(D.weights, "strict"), StarTree(Dbar.weights, "strict")
    return (Dbar, D) if swap else (D, Dbar)

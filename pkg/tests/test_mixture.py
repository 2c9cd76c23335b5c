import itertools
import random
from fractions import Fraction

import pytest

from helpers import random_caterpillar5, random_i2_double_star, random_star
from startreemix import (
    DoubleStar,
    NotInImage,
    OutOfDomain,
    SizeMismatch,
    StarInput,
    StarTree,
    classify_topology,
    cut_metric,
    decide_two_star_mixture,
    double_star,
    double_star_metric,
    enumerate_fiber_cases,
    k_star_feasible,
    make_dissimilarity,
    offsets_from_stars,
    quartet_is_12_34,
    sample_decomposition,
    star,
    star_metric,
    tree_metric,
    tropical_mix,
    verify_decomposition,
)
from startreemix.cases import PARTNER, TABLES, Affine

H = Fraction(1, 2)
QUARTET = make_dissimilarity(4, [9, 8, 8, 7, 7, 2])
N5 = double_star_metric(double_star((1, 2), 1, (4, 3, 1, 2, 2)))
FIXTURE = (star(2, 6, 1, 1), star(Fraction(15, 2), Fraction(3, 2), H, H))


def quartet(e, g, I=(1, 2)):
    regime = "closed" if 0 in e else "strict"
    return double_star_metric(double_star(I, g, e, regime=regime))


class TestOffsets:
    def test_dominating_pair(self):
        o = offsets_from_stars(star(1, 1, 1, 1), star(2, 1, 1, 1))
        assert o.as_tuple() == (1, 0, 1, 0, 1, 0)
        assert not quartet_is_12_34(o)

    def test_equal_stars(self):
        o = offsets_from_stars(star(1, 2, 3, 4), star(1, 2, 3, 4))
        assert o.as_tuple() == (0,) * 6
        assert not quartet_is_12_34(o)

    def test_case_one_fixture(self):
        o = offsets_from_stars(*FIXTURE)
        # exact subtraction; u is 1, not -3
        assert o.as_tuple() == (5, -5, 5, -5, 1, -1)
        assert o.s + o.t == o.x + o.y == o.u + o.w
        assert quartet_is_12_34(o)
        tc = classify_topology(tropical_mix(*(star_metric(s) for s in FIXTURE)))
        assert tc.kind == "DoubleStar" and tc.double_star.I == (1, 2) and tc.double_star.n == 4

    def test_every_family_sample_has_split_12_34(self):
        for T in (QUARTET, quartet((5, 4, 3, 3), 2), quartet((1, 1, 5, 4), 2)):
            for f in enumerate_fiber_cases(T):
                for u, w in f.grid(4):
                    assert quartet_is_12_34(offsets_from_stars(*f.stars(u, w)))

    def test_size(self):
        with pytest.raises(SizeMismatch):
            offsets_from_stars(star(1, 1, 1, 1, 1), star(1, 1, 1, 1))

    def test_identity_on_random_pairs(self):
        rng = random.Random(0)
        for _ in range(200):
            o = offsets_from_stars(random_star(rng, 4), random_star(rng, 4))
            assert o.s + o.t == o.x + o.y == o.u + o.w


class TestDecide:
    def test_quartet_yes(self):
        d = decide_two_star_mixture(QUARTET)
        assert d.yes and d.basis == "Quartet" and d.families == ("1.1", "1.2", "1.3", "1.4")
        assert d.provenance == "TheoremOnly"
        assert verify_decomposition(QUARTET, *d.witness)

    def test_weak_quartet_no(self):
        d = decide_two_star_mixture(quartet((1, 1, 1, 1), 2), cross_check=True)
        assert not d.yes and d.basis == "WeightConditionFailed"
        assert d.oracle_verdict == "No" and d.oracle.patterns_exhausted == 32

    def test_two_internal_edges(self):
        d = decide_two_star_mixture(tree_metric(random_caterpillar5(random.Random(1))))
        assert not d.yes and d.basis == "TopologyExcluded"

    def test_star(self):
        S = star(1, 2, 3, 4)
        d = decide_two_star_mixture(star_metric(S))
        assert d.yes and d.basis == "StarTrivial" and d.witness == (S, S)

    def test_not_tree_metric(self):
        d = decide_two_star_mixture(make_dissimilarity(4, [1, 1, 1, 1, 1, 2]), cross_check=True)
        assert not d.yes and d.basis == "TopologyExcluded" and d.oracle_verdict is None

    def test_degenerate_inputs(self):
        cut = cut_metric([{1, 2}, {3, 4}])
        strict = decide_two_star_mixture(cut, cross_check=True)
        assert not strict.yes and strict.oracle_verdict == "No"
        closed = decide_two_star_mixture(cut, regime="closed", cross_check=True)
        assert not closed.yes and closed.oracle_verdict == "No"
        zero_star = star_metric(star(0, 1, 1, 1, regime="closed"))
        assert not decide_two_star_mixture(zero_star).yes
        assert decide_two_star_mixture(zero_star, regime="closed").yes

    def test_n5_i2(self):
        d = decide_two_star_mixture(N5, cross_check=True)
        assert d.yes and d.basis == "DoubleStarI2" and d.oracle_verdict == "Yes"
        assert d.families == ("1.1", "1.2", "1.3", "1.4")

    def test_n5_i2_fails_on_small_side(self):
        T = double_star_metric(double_star((1, 2), 2, (3, 2, 5, 5, 5)))
        d = decide_two_star_mixture(T, cross_check=True)
        assert not d.yes and d.basis == "WeightConditionFailed" and d.oracle_verdict == "No"

    def test_i3_reports_both_verdicts(self):
        T = double_star_metric(double_star((1, 2, 3), 1, (2,) * 6))
        d = decide_two_star_mixture(T)
        assert d.verdict == "Yes" and d.basis == "DoubleStarI3plus" and d.provenance == "TheoremOnly"
        checked = decide_two_star_mixture(T, cross_check=True)
        assert checked.theorem_verdict == "Yes" and checked.oracle_verdict == "No"
        assert checked.verdict == "No" and checked.provenance == "OracleConfirmed"
        assert checked.oracle.patterns_exhausted == 2**14 and "disagrees" in checked.note

    def test_scale_invariant(self):
        for T in (QUARTET, N5, quartet((1, 1, 1, 1), 2), quartet((3, 3, 1, 1), 2)):
            for lam in (Fraction(1, 3), 7):
                a, b = decide_two_star_mixture(T), decide_two_star_mixture(T.scale(lam))
                assert (a.verdict, a.basis, a.families) == (b.verdict, b.basis, b.families)

    def test_closed_regime_matches_nonnegative_oracle(self):
        vals = [Fraction(k, 2) for k in range(0, 5)]
        for e in itertools.product(vals, repeat=4):
            T = quartet(e, 1) if any(e) else None
            if T is None:
                continue
            d = decide_two_star_mixture(T, regime="closed")
            assert d.yes == k_star_feasible(T, 2, "nonnegative").feasible, e

    def test_swapped_witness(self):
        d = decide_two_star_mixture(QUARTET)
        D, Dbar = d.witness
        assert verify_decomposition(QUARTET, Dbar, D)


class TestFibers:
    def test_quartet_families(self):
        fams = enumerate_fiber_cases(QUARTET)
        assert [f.case_id for f in fams] == ["1.1", "1.2", "1.3", "1.4"]
        f11 = fams[0]
        assert f11.interval("u") == ((0, False), (3, True))
        assert f11.interval("w") == ((-2, True), (0, True))

    def test_both_sides(self):
        assert len(enumerate_fiber_cases(quartet((5, 4, 3, 3), 2))) == 8

    def test_other_side_only(self):
        fams = enumerate_fiber_cases(quartet((1, 1, 5, 4), 2))
        assert [f.case_id for f in fams] == ["2.1", "2.2", "2.3", "2.4"]

    def test_n5_case_1_2(self):
        f12 = {f.case_id: f for f in enumerate_fiber_cases(N5)}["1.2"]
        # upper end of u kept open so that 1.2 and 1.3 stay disjoint
        assert f12.interval("u") == ((-2, True), (0, True))
        assert f12.interval("w", Fraction(-1)) == ((0, False), (2, True))

    def test_errors(self):
        with pytest.raises(StarInput):
            enumerate_fiber_cases(star_metric(star(1, 2, 3, 4)))
        with pytest.raises(NotInImage):
            enumerate_fiber_cases(quartet((1, 1, 1, 1), 2))
        with pytest.raises(NotInImage):
            enumerate_fiber_cases(double_star_metric(double_star((1, 2, 3), 1, (2,) * 6)))

    def test_relabelled_input(self):
        T = quartet((5, 1, 4, 1), 2, I=(1, 3))
        fams = enumerate_fiber_cases(T)
        assert [f.case_id for f in fams] == ["1.1", "1.2", "1.3", "1.4"]
        assert fams[0].order == (1, 3, 2, 4)
        for f in fams:
            for u, w in f.grid(3):
                assert verify_decomposition(T, *sample_decomposition(T, f.case_id, u, w))

    def test_json_shape(self):
        desc = enumerate_fiber_cases(N5)[0].describe()
        assert desc["id"] == "1.1" and desc["orbit"] is True
        formulas = [c["formula"] for c in desc["constraints"]]
        assert "w+2e5 > 0" in formulas
        assert desc["u"] == {"lower": "0", "lower_open": False, "upper": "3", "upper_open": True,
                             "depends_on_other": False}


class TestSample:
    def test_case_1_1_fixture(self):
        assert sample_decomposition(QUARTET, "1.1", 1, -1) == FIXTURE

    def test_case_1_4_fixture(self):
        T = quartet((3, 2, 1, 1), 1)
        D, Dbar = sample_decomposition(T, "1.4", Fraction(-1, 4), Fraction(-1, 2))
        assert D == star(2, 3, 1, 1)
        assert Dbar == star(Fraction(17, 4), H, Fraction(3, 4), Fraction(3, 4))

    def test_n5_case_1_2_fixture(self):
        D, Dbar = sample_decomposition(N5, "1.2", -1, 1)
        assert D == star(Fraction(5, 2), Fraction(9, 2), H, Fraction(3, 2), Fraction(3, 2))
        assert Dbar == star(5, 1, 1, 2, 2)

    def test_swap(self):
        assert sample_decomposition(QUARTET, "1.1", 1, -1, swap=True) == FIXTURE[::-1]

    def test_boundary(self):
        with pytest.raises(OutOfDomain):
            sample_decomposition(QUARTET, "1.1", 3, -1)
        with pytest.raises(OutOfDomain):
            sample_decomposition(N5, "1.2", 0, 1)
        with pytest.raises(OutOfDomain):
            sample_decomposition(QUARTET, "2.1", 1, -1)
        D, Dbar = sample_decomposition(QUARTET, "1.1", 3, -1, regime="closed")
        assert D.degenerate and D.regime == "closed"
        assert verify_decomposition(QUARTET, D, Dbar, regime="closed")
        assert not verify_decomposition(QUARTET, D, Dbar)

    def test_grids_verify_and_families_disjoint(self):
        rng = random.Random(4)
        shapes = [QUARTET, N5, quartet((5, 4, 3, 3), 2)]
        shapes += [double_star_metric(random_i2_double_star(rng, n)) for n in (4, 5, 6)]
        for T in shapes:
            seen = {}
            for f in enumerate_fiber_cases(T):
                pts = f.grid(5)
                assert len(pts) == 25
                for u, w in pts:
                    D, Dbar = sample_decomposition(T, f.case_id, u, w)
                    assert verify_decomposition(T, D, Dbar) and verify_decomposition(T, Dbar, D)
                    pair = frozenset((D, Dbar))
                    assert seen.setdefault(pair, f.case_id) == f.case_id


class TestVerify:
    def test_perturbed(self):
        D, Dbar = FIXTURE
        assert verify_decomposition(QUARTET, D, Dbar)
        bumped = StarTree((D.weights[0], D.weights[1] + 1) + D.weights[2:])
        assert not verify_decomposition(QUARTET, bumped, Dbar)

    def test_star_pair(self):
        S = star(1, 2, 3, 4)
        assert verify_decomposition(star_metric(S), S, S)

    def test_size(self):
        with pytest.raises(SizeMismatch):
            verify_decomposition(QUARTET, star(1, 1, 1), star(1, 1, 1))


def test_oracle_agrees_with_decider_on_n5_and_n6():
    rng = random.Random(9)
    for n in (5, 6):
        for _ in range(6 if n == 5 else 3):
            ds = random_i2_double_star(rng, n)
            T = double_star_metric(ds)
            d = decide_two_star_mixture(T, cross_check=True)
            assert d.theorem_verdict == d.oracle_verdict == "Yes"
            # push one small-side pendant down to g: both routes say No
            pend = list(ds.pendant)
            pend[ds.I[0] - 1] = ds.g
            T2 = double_star_metric(DoubleStar(ds.I, ds.J, ds.g, tuple(pend)))
            d2 = decide_two_star_mixture(T2, cross_check=n == 5)
            assert not d2.yes
            if n == 5:
                assert d2.oracle_verdict == "No"


class TestCaseTables:
    def test_affine_parser(self):
        f = Affine.parse("e1-g-w/2-u")
        assert f.coeff("w") == -H and f.coeff("u") == -1 and f.coeff("e1") == 1
        assert str(Affine.parse("2e1-2g-w")) == "2*e1-2*g-w"
        assert Affine.parse("w+2ej").rename("ej", "e5").coeff("e5") == 2
        with pytest.raises(ValueError):
            Affine.parse("e1+*")

    def test_tables_are_well_formed(self):
        allowed = {"", "u", "w", "g", "e1", "e2", "e3", "e4", "ej"}
        for cid, table in TABLES.items():
            roles = {"1", "2", "j"} if table.side == 1 else {"1", "2", "3", "4"}
            assert set(table.first) == set(table.second) == roles, cid
            texts = list(table.first.values()) + list(table.second.values())
            texts += [text for text, _ in table.domain]
            for text in texts:
                assert {sym for sym, _ in Affine.parse(text).terms} <= allowed, (cid, text)

    @pytest.mark.parametrize("one,two", sorted(PARTNER.items()))
    def test_partner_relabelling(self, one, two):
        e, g = (Fraction(5), Fraction(7, 2), Fraction(3), Fraction(4)), Fraction(1)
        T = quartet(e, g)
        T_swapped = quartet((e[2], e[3], e[0], e[1]), g)
        fam_one = {f.case_id: f for f in enumerate_fiber_cases(T_swapped)}[one]
        fam_two = {f.case_id: f for f in enumerate_fiber_cases(T)}[two]

        def relabel(s):
            w = s.weights
            return StarTree((w[2], w[3], w[0], w[1]), s.regime)

        for u, w in fam_one.grid(5):
            assert fam_two.contains(w, u)
            assert tuple(relabel(s) for s in fam_one.stars(u, w)) == fam_two.stars(w, u)
        for u, w in fam_two.grid(5):
            assert fam_one.contains(w, u)


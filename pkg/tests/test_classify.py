import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import exact_polys
from families import chebyshev_instance, power_instance, witness_recomposes
from polyshare.classify import (
    CHEBYSHEV_FORM,
    COMPOSITE,
    POWER_FORM,
    ClassifyError,
    HypothesisError,
    NoSolution,
    SetValidationError,
    build_chain,
    cardinality_gate,
    classify_invariant,
    classify_same_target,
    classify_shared_preimage,
    commuting_shadow,
    construct_K3,
    find_mu,
    julia_equal,
    minimal_invariant_generator,
    theorem4_suite,
)
from polyshare.poly import LinearMap, chebyshev, compose, iterate, parse_poly
from polyshare.scalar import QI
from polyshare.sets import (
    ConcentricCircles,
    FinitePoints,
    JuliaParams,
    Segment,
    julia_sample,
    preimage,
    set_equal,
)

P = parse_poly
UNIT = ConcentricCircles(0, (1.0,))


def pts(*zs):
    return FinitePoints(np.array(zs, dtype=complex))


class TestSharedPreimage:
    def test_composite(self):
        w = classify_shared_preimage(P("z^2"), P("z^4"))
        assert w.case == COMPOSITE and w.g1 == P("z^2") and w.passed

    def test_power_form(self):
        w = classify_shared_preimage(P("z^2"), P("z*(z^2+1)"))
        assert w.case == POWER_FORM and (w.d, w.c) == (1, 1)
        assert w.R == P("z + 1")
        assert w.g1 == P("z*(z+1)^2") and w.g2 == P("z^2")
        assert w.f1_tilde == P("z^2") and w.f2_tilde == P("z*(z^2+1)")
        assert w.sigma1.is_identity() and w.sigma2.is_identity()
        assert compose(w.g1, P("z^2")) == P("z^2*(z^2+1)^2") == compose(w.g2, P("z*(z^2+1)"))

    def test_chebyshev_form(self):
        w = classify_shared_preimage(chebyshev(2), chebyshev(3))
        assert w.case == CHEBYSHEV_FORM
        assert w.g1 == chebyshev(3) and w.g2 == chebyshev(2)
        assert w.sigma1.is_identity() and w.sigma2.is_identity()

    def test_swapped(self):
        w = classify_shared_preimage(P("z*(z^2+1)"), P("z^2"))
        assert w.swapped and w.case == POWER_FORM

    def test_no_solution(self):
        assert isinstance(classify_shared_preimage(P("z^2 + z"), P("z^3 + 1")), NoSolution)
        assert isinstance(classify_shared_preimage(P("z^2"), P("z^4 + z")), NoSolution)

    def test_constant_rejected(self):
        with pytest.raises(ValueError):
            classify_shared_preimage(P("3"), P("z^2"))

    def test_approx_input(self):
        w = classify_shared_preimage(chebyshev(2).to_approx(), chebyshev(3).to_approx())
        assert w.case == CHEBYSHEV_FORM and w.passed and not w.exact

    def test_power_family_round_trip(self):
        rng = random.Random(7)
        for _ in range(25):
            f1, f2 = power_instance(rng)
            w = classify_shared_preimage(f1, f2)
            assert witness_recomposes(w, f1, f2), (str(f1), str(f2))
            if w.case == POWER_FORM:
                e1 = w.f1.degree // w.d
                e2 = w.f2.degree // w.d
                assert w.c == e2 % e1 and math.gcd(w.c, e1) == 1

    def test_chebyshev_family_round_trip(self):
        rng = random.Random(11)
        for _ in range(15):
            f1, f2 = chebyshev_instance(rng)
            w = classify_shared_preimage(f1, f2)
            assert w.case == CHEBYSHEV_FORM
            assert witness_recomposes(w, f1, f2), (str(f1), str(f2))

    @settings(max_examples=25)
    @given(exact_polys(min_degree=2, max_degree=4), exact_polys(min_degree=2, max_degree=4))
    def test_sound_on_random_pairs(self, f1, f2):
        w = classify_shared_preimage(f1, f2)
        if not isinstance(w, NoSolution):
            assert w.passed
            assert compose(w.g1, w.f1) == compose(w.g2, w.f2) or w.case == COMPOSITE


class TestK3:
    def test_worked_instance(self):
        w = classify_shared_preimage(P("z^2"), P("z*(z^2+1)"))
        w3 = construct_K3(w, pts(0, -1), pts(0))
        assert set_equal(w3.K3, pts(0), 1e-12)[0]
        assert set_equal(preimage(P("z^2"), pts(0, -1)), pts(0, 1j, -1j), 1e-9)[0]
        assert w3.passed

    def test_chebyshev_fibers(self):
        w = classify_shared_preimage(chebyshev(2), chebyshev(3))
        K1 = preimage(chebyshev(3), pts(2))
        K2 = preimage(chebyshev(2), pts(2))
        w3 = construct_K3(w, K1, K2)
        assert set_equal(w3.K3, pts(2), 1e-9)[0]

    def test_mismatch(self):
        w = classify_shared_preimage(chebyshev(2), chebyshev(3))
        with pytest.raises(SetValidationError) as err:
            construct_K3(w, pts(0), pts(0))
        assert any(not v.passed for v in err.value.validations)

    def test_composite_rejected(self):
        with pytest.raises(ClassifyError):
            construct_K3(classify_shared_preimage(P("z^2"), P("z^4")), pts(0), pts(0))

    def test_cardinality_gate(self):
        w = classify_shared_preimage(P("z^2"), P("z^3 + z"))
        # lcm(2, 3) = 6; d2/d + 1 = 4; d1/d + 1 = 3
        assert cardinality_gate(w, K=pts(*range(6)))
        assert not cardinality_gate(w, K=pts(*range(5)))
        assert cardinality_gate(w, K1=pts(*range(4)))
        assert not cardinality_gate(w, K1=pts(*range(3)))
        assert cardinality_gate(w, K2=pts(*range(3)))
        assert not cardinality_gate(w, K2=pts(*range(2)))
        assert cardinality_gate(w, K=UNIT)


class TestSameTarget:
    def test_composite(self):
        r = classify_same_target(P("z^2"), P("z^4"), UNIT)
        assert r.case == COMPOSITE and r.g1 == P("z^2") and r.passed

    def test_segment(self):
        r = classify_same_target(chebyshev(2), chebyshev(3), Segment(-1, 1))
        assert r.case == "Segment" and r.sigma.is_identity() and r.signs == (1, 1) and r.passed

    def test_circles(self):
        gamma = complex(0.6, 0.8)
        f2 = P("z^3") * QI("3/5", "4/5")
        r = classify_same_target(P("z^2"), f2, UNIT)
        assert r.case == "Circles" and abs(complex(r.gamma) - gamma) < 1e-15 and r.passed

    def test_hypothesis(self):
        with pytest.raises(HypothesisError):
            classify_same_target(P("z^2"), P("z^3 + 1"), UNIT)

    def test_finite_target(self):
        r = classify_same_target(P("z^2"), P("z^4"), pts(0))
        assert r.case == "OutOfTheorem"


class TestInvariant:
    def test_circles(self):
        r = classify_invariant(P("z^2"), P("z^3"), UNIT)
        assert r.case == "Circles" and r.gamma == 1 and r.passed

    def test_segment(self):
        r = classify_invariant(P("z^2 - 2"), P("z^3 - 3*z"), Segment(-2, 2))
        assert r.case == "Segment" and r.sigma == LinearMap(2, 0) and r.passed

    def test_point(self):
        r = classify_invariant(P("(z-1)^2 + 1"), P("-(z-1)^3 + 1"), pts(1))
        assert r.case == "PointCase" and r.sigma == LinearMap(1, 1) and r.gamma == -1

    def test_iterate_family(self):
        p = P("z^2 - 1")
        J = julia_sample(p)
        r = classify_invariant(iterate(p, 2), iterate(p, 3), J)
        assert r.case == "IterateFamily" and r.p == p and (r.s1, r.s2) == (2, 3)
        assert r.mu1.is_identity() and r.mu2.is_identity() and r.passed

    def test_hypothesis(self):
        with pytest.raises(HypothesisError):
            classify_invariant(P("z^2"), P("z^2 - 1"), UNIT)


class TestGenerator:
    def test_iterates(self):
        p = P("z^2 - 1")
        J = julia_sample(p)
        assert minimal_invariant_generator(iterate(p, 2), iterate(p, 3), J) == (p, 2, 3)
        assert minimal_invariant_generator(p, p, J) == (p, 1, 1)

    def test_power_family(self):
        assert minimal_invariant_generator(P("z^4"), P("z^8"), UNIT) == (P("z^2"), 2, 3)

    def test_rotated_iterate(self):
        # f2 = -p∘p with p = z^2: μ2 = -w maps the circle to itself
        p, s1, s2 = minimal_invariant_generator(P("z^2"), P("-z^4"), UNIT)
        assert p == P("z^2") and (s1, s2) == (1, 2)

    def test_none(self):
        with pytest.raises(ClassifyError):
            minimal_invariant_generator(P("z^2"), P("z^3"), UNIT)


class TestFindMu:
    def test_examples(self):
        assert find_mu(P("z^2"), P("z^3")).is_identity()
        assert find_mu(P("z^2"), P("-z^3")) == LinearMap(-1, 0)
        assert find_mu(P("z^2+1"), P("z^3")) is None

    def test_degree_gate(self):
        with pytest.raises(ValueError):
            find_mu(P("z"), P("z^2"))

    @settings(max_examples=40)
    @given(exact_polys(min_degree=2, max_degree=4), exact_polys(min_degree=2, max_degree=4))
    def test_correct_when_returned(self, f1, f2):
        mu = find_mu(f1, f2)
        if mu is not None:
            assert compose(f1, f2) - mu(compose(f2, f1)) == P("0")

    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_chebyshev_commute(self, n):
        assert find_mu(chebyshev(n), chebyshev(n + 1)).is_identity()


class TestShadow:
    def test_power_pair(self):
        s1, s2, vals = commuting_shadow(P("z*(z^2+1)"), P("z^3"), 2)
        assert s1 == P("z*(z+1)^2") and s2 == P("z^3")
        assert compose(s1, P("z^2")) == P("z^2*(z^2+1)^2") == compose(P("z^2"), P("z*(z^2+1)"))
        assert all(v.passed for v in vals)
        # no μ relates this pair, so the shadows need not commute and do not
        assert find_mu(P("z*(z^2+1)"), P("z^3")) is None
        assert compose(s1, s2) != compose(s2, s1)
        assert not any("commute" in v.name for v in vals)

    def test_trivial(self):
        s1, s2, vals = commuting_shadow(P("z^2"), P("z^3"), 1)
        assert (s1, s2) == (P("z^2"), P("z^3")) and all(v.passed for v in vals)

    def test_sign(self):
        s1, s2, vals = commuting_shadow(P("-z^3"), P("z^2"), 2)
        assert s1 == P("z^3") and s2 == P("z^2")
        assert compose(s1, P("z^2")) == compose(P("z^2"), P("-z^3"))
        assert all(v.passed for v in vals)

    def test_structure_failure(self):
        with pytest.raises(ClassifyError):
            commuting_shadow(P("z^2 + z"), P("z^3"), 2)


class TestJulia:
    def test_examples(self):
        assert julia_equal(P("z^2"), P("z^3"))[0]
        assert julia_equal(P("z^2 - 2"), P("z^3 - 3*z"))[0]
        assert not julia_equal(P("z^2"), P("z^2 - 1"))[0]

    def test_theorem4_examples(self):
        r = theorem4_suite(P("z^2"), P("z^3"), UNIT, UNIT)
        assert r.common_invariant and r.julia_equal and r.mu_condition and r.mu.is_identity()
        r = theorem4_suite(P("z^2"), P("-z^3"), UNIT, UNIT)
        assert r.consistent and r.mu == LinearMap(-1, 0) and r.mu_condition
        J = julia_sample(P("z^2 - 1"))
        r = theorem4_suite(P("z^2"), P("z^2 - 1"), UNIT, J)
        assert r.consistent and not r.julia_equal and not r.mu_condition

    @settings(max_examples=6)
    @given(st.sampled_from(["z^2 - 1", "z^2 + 1/4", "z^2 - 2", "z^2 + i/4", "z^3"]),
           st.integers(1, 2), st.integers(1, 3))
    def test_condition_three_implies_equal_julia(self, p, s1, s2):
        p = P(p)
        f1, f2 = iterate(p, s1), iterate(p, s2)
        assert find_mu(f1, f2).is_identity()
        assert julia_equal(f1, f2, JuliaParams(samples=4000))[0]


class TestChain:
    def test_chebyshev(self):
        seg = Segment(-1, 1)
        r = build_chain(chebyshev(2), chebyshev(3), seg, seg, 3)
        assert r.passed
        for k, e in enumerate(r.entries, start=1):
            assert e.A.degree == 2 ** k and e.B.degree == 3 ** k
            assert compose(chebyshev(2 ** k), P("z")).degree == e.A.degree
        assert r.entries[2].A == chebyshev(8) and r.entries[2].B == chebyshev(27)

    def test_power(self):
        r = build_chain(P("z^2"), P("z^3"), UNIT, UNIT, 3)
        assert r.passed
        assert [e.A for e in r.entries] == [P("z^2"), P("z^4"), P("z^8")]
        assert [e.B for e in r.entries] == [P("z^3"), P("z^9"), P("z^27")]

    def test_depth_one(self):
        w = classify_shared_preimage(chebyshev(2), chebyshev(3))
        r = build_chain(chebyshev(2), chebyshev(3), Segment(-1, 1), Segment(-1, 1), 1)
        e = r.entries[0]
        assert e.A == w.f1_tilde and e.B == w.f2_tilde and r.passed

    def test_distinct_finite_fibers_break_at_level_two(self):
        K1 = preimage(chebyshev(3), pts(2))
        K2 = preimage(chebyshev(2), pts(2))
        r = build_chain(chebyshev(2), chebyshev(3), K1, K2, 2)
        assert all(v.passed for v in r.entries[0].validations)
        assert not all(v.passed for v in r.entries[1].validations)

    def test_degree_cap(self):
        with pytest.raises(ClassifyError):
            build_chain(chebyshev(2), chebyshev(3), Segment(-1, 1), Segment(-1, 1), 9)

    def test_composite_rejected(self):
        with pytest.raises(ClassifyError):
            build_chain(P("z^2"), P("z^4"), UNIT, UNIT, 2)

import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import exact_polys, random_poly
from oracles import brute_right_factor, numeric_fiber_mean
from polyshare.decompose import (
    INFINITE,
    DecomposeError,
    chebyshev_structure,
    divisors,
    fiber_average,
    fiber_power_sums,
    full_decomposition,
    gcrc,
    padic_expand,
    power_structure,
    right_factor,
    rotational_structure,
)
from polyshare.poly import NEG_INF, LinearMap, Polynomial, chebyshev, compose, parse_poly
from polyshare.scalar import QI

P = parse_poly


class TestRightFactor:
    def test_power(self):
        assert right_factor(P("z^6"), 2) == (P("z^3"), P("z^2"))

    def test_substitution(self):
        assert right_factor(P("(z^2+1)^3"), 2) == (P("(z+1)^3"), P("z^2"))

    def test_indecomposable(self):
        assert right_factor(P("z^4 + z"), 2) is None

    def test_bad_degree(self):
        with pytest.raises(DecomposeError):
            right_factor(P("z^6"), 4)
        with pytest.raises(DecomposeError):
            right_factor(P("z^6"), 6)

    def test_approx_input(self):
        f = compose(P("z^2 + 1/3"), P("z^3 - 2*z")).to_approx()
        g, h = right_factor(f, 3)
        assert h.close_to(P("z^3 - 2*z").to_approx(), 1e-10)
        assert compose(g, h).close_to(f, 1e-10)

    @settings(max_examples=40)
    @given(exact_polys(min_degree=2, max_degree=3), exact_polys(min_degree=2, max_degree=3, monic=True))
    def test_composites_found(self, g, h):
        h = h - h.coeff(0)
        f = compose(g, h)
        found = right_factor(f, h.degree)
        assert found is not None
        assert found[1] == h and compose(*found) == f

    def test_matches_oracle(self, rng):
        for trial in range(30):
            n = rng.choice([4, 6, 8, 9])
            if trial % 2:
                r = rng.choice(divisors(n)[1:-1])
                inner = random_poly(rng, r, monic=True)
                f = compose(random_poly(rng, n // r, monic=True), inner - inner.coeff(0))
            else:
                f = random_poly(rng, n, monic=True)
            for r in divisors(n)[1:-1]:
                mine = right_factor(f, r)
                ref = brute_right_factor(f, r)
                assert (mine is None) == (ref is None), (str(f), r)
                if mine is not None:
                    assert mine[1] == ref[1] and compose(*mine) == f


class TestFullDecomposition:
    def test_power_chain(self):
        d = full_decomposition(P("z^8"))
        assert d.chain == (P("z^2"),) * 3

    def test_chebyshev_12(self):
        d = full_decomposition(chebyshev(12))
        assert sorted(d.degrees) == [2, 2, 3]
        assert d.recompose() == chebyshev(12)

    def test_prime_degree(self):
        d = full_decomposition(P("z^3 + z"))
        assert d.chain == (P("z^3 + z"),)

    @settings(max_examples=25)
    @given(exact_polys(min_degree=1, max_degree=3), exact_polys(min_degree=1, max_degree=3))
    def test_recompose_and_indecomposable(self, a, b):
        f = compose(a, b)
        d = full_decomposition(f)
        assert d.recompose() == f
        for p in d.chain:
            assert p.degree >= 2
            for r in divisors(p.degree)[1:-1]:
                assert right_factor(p, r) is None


class TestGcrc:
    def test_substitution(self):
        W, A, B = gcrc(P("(z^2+1)^2"), P("(z^2+1)^3 + (z^2+1)"))
        assert W == P("z^2")
        assert A == P("(z+1)^2") and B == P("(z+1)^3 + (z+1)")

    def test_powers(self):
        assert gcrc(P("z^4"), P("z^6"))[0] == P("z^2")

    def test_coprime(self):
        assert gcrc(P("z^2"), P("z^3 + 1"))[0] == P("z")

    def test_maximal(self, rng):
        for _ in range(10):
            W = random_poly(rng, 2, monic=True)
            W = W - W.coeff(0)
            f1 = compose(random_poly(rng, 2), W)
            f2 = compose(random_poly(rng, 3), W)
            got, A, B = gcrc(f1, f2)
            assert got == W and compose(A, got) == f1 and compose(B, got) == f2


class TestPadic:
    def test_examples(self):
        assert padic_expand(P("z^5"), P("z^2")).digits == (P("0"), P("0"), P("z"))
        assert padic_expand(P("z^2+z+1"), P("z^2")).digits == (P("z+1"), P("1"))
        p = P("z^3 + i*z")
        assert padic_expand(p, p).digits == (P("0"), P("1"))

    @given(exact_polys(max_degree=9), exact_polys(min_degree=1, max_degree=3))
    def test_round_trip(self, Q, base):
        e = padic_expand(Q, base)
        assert e.recompose() == Q
        assert all(a.degree < base.degree for a in e.digits)
        if Q.degree != NEG_INF:
            assert len(e.digits) == Q.degree // base.degree + 1


class TestFiberAverage:
    def test_examples(self):
        assert fiber_average(P("z^3+z"), P("z^2")) == P("0")
        assert fiber_average(P("z^2"), P("z^2")) == P("z^2")
        assert fiber_average(P("z^2+z+1"), P("z^2")) == P("z^2+1")

    def test_power_sums_independent_of_constant(self):
        a = fiber_power_sums(P("z^4 + 2*z^3 - z + 5"))
        b = fiber_power_sums(P("z^4 + 2*z^3 - z - 7/3"))
        assert a == b

    @given(exact_polys(max_degree=8), exact_polys(min_degree=1, max_degree=4))
    def test_idempotent(self, Q, base):
        once = fiber_average(Q, base)
        assert fiber_average(once, base) == once

    @given(exact_polys(min_degree=2, max_degree=5), st.integers(0, 2 ** 32 - 1))
    def test_constant_below_degree(self, base, seed):
        rng = random.Random(seed)
        R = random_poly(rng, rng.randrange(base.degree))
        avg = fiber_average(R, base)
        assert avg.degree <= 0

    def test_numeric_oracle(self, rng):
        for _ in range(10):
            base = random_poly(rng, rng.randint(1, 4))
            Q = random_poly(rng, rng.randint(0, 10))
            avg = fiber_average(Q, base).to_approx()
            for _ in range(5):
                z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
                ref = numeric_fiber_mean(Q, base, z)
                assert abs(avg(z) - ref) <= 1e-8 * max(1.0, abs(ref))


class TestStructures:
    def test_rotational_examples(self):
        r = rotational_structure(P("z^5 + z^2"))
        assert (r.center, r.order, r.residue) == (QI(0), 3, 2)
        assert r.inner_poly == P("z + 1")
        r = rotational_structure(P("z^3 + z + 1"))
        assert (r.center, r.order, r.residue) == (QI(0), 2, 1)
        assert r.inner_poly == P("z + 1")
        r = rotational_structure(P("z^4"))
        assert r.order == INFINITE and r.residue == 0

    @given(exact_polys(min_degree=2, max_degree=7))
    def test_rotational_recomposes(self, f):
        r = rotational_structure(f)
        assert r.recompose() == f
        assert r.symmetry_residual(f) <= 1e-9 * max(1.0, f.max_abs_coeff())

    def test_power_examples(self):
        s, lam, n = power_structure(P("2*(z-1)^2 + 3"))
        assert s == LinearMap(2, 3) and lam == LinearMap(1, -1) and n == 2
        assert power_structure(P("z^3 - 3*z")) is None
        s, lam, n = power_structure(P("z^5"))
        assert s.is_identity() and lam.is_identity()

    def test_chebyshev_examples(self):
        s, lam, n = chebyshev_structure(P("z^2 - 2"))
        assert s == LinearMap(2, 0) and lam == LinearMap(QI("1/2"), 0) and n == 2
        s, lam, n = chebyshev_structure(P("z^3 - 3*z"))
        assert s == LinearMap(2, 0) and lam == LinearMap(QI("1/2"), 0) and n == 3

    def test_z3_plus_z_is_irrational_chebyshev(self):
        # no exact normal form; an approximate one exists with α = i√3/2
        found = chebyshev_structure(P("z^3 + z"))
        assert found is not None
        s, lam, _ = found
        assert not lam.exact
        assert abs(complex(lam.a) ** 2 + 0.75) < 1e-12

    @given(exact_polys(min_degree=3, max_degree=7))
    def test_mutually_exclusive(self, f):
        assert power_structure(f) is None or chebyshev_structure(f) is None

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 7])
    def test_chebyshev_recognized_under_linear_maps(self, n):
        s0, l0 = LinearMap(QI(2, 1), QI("-1/3")), LinearMap(QI(0, 3), 1)
        f = s0(compose(chebyshev(n), l0.as_poly()))
        s, lam, m = chebyshev_structure(f)
        assert m == n and s(compose(chebyshev(n), lam.as_poly())) == f

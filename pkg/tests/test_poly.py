import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import exact_polys
from polyshare.poly import (
    CENTERED_FORM,
    NEG_INF,
    LinearMap,
    Polynomial,
    PolyError,
    Z,
    chebyshev,
    compose,
    conjugate,
    iterate,
    monic_chebyshev,
    normalize,
    parse_poly,
)
from polyshare.roots import roots
from polyshare.scalar import QI, I

P = parse_poly


def cheb_oracle(n, x):
    # T_n(cos t) = cos(n t), valid on [-1, 1]
    return math.cos(n * math.acos(x))


class TestCompose:
    def test_binomial(self):
        assert compose(P("z^2"), P("z+1")) == P("z^2 + 2*z + 1")

    def test_chebyshev_pair(self):
        assert compose(chebyshev(2), chebyshev(3)) == chebyshev(6)

    def test_scaling(self):
        assert compose(P("z^3"), P("2*z")) == P("8*z^3")

    def test_exactness_kept(self):
        assert compose(P("z^2 + i"), P("z/3")).exact

    def test_mixed_flavor_degrades(self):
        g = compose(P("z^2"), P("z").to_approx())
        assert not g.exact

    @given(exact_polys(max_degree=4), exact_polys(max_degree=4), exact_polys(max_degree=3))
    def test_associative(self, a, b, c):
        assert compose(a, compose(b, c)) == compose(compose(a, b), c)

    @given(exact_polys(min_degree=1, max_degree=5), exact_polys(min_degree=1, max_degree=5))
    def test_degree_multiplies(self, g, f):
        assert compose(g, f).degree == g.degree * f.degree

    @given(exact_polys(max_degree=5), exact_polys(max_degree=4),
           st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False))
    def test_evaluation_consistent(self, g, f, x):
        ga, fa = g.to_approx(), f.to_approx()
        lhs = compose(ga, fa)(x)
        rhs = ga(fa(x))
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))


class TestChebyshev:
    def test_small(self):
        assert chebyshev(0) == P("1")
        assert chebyshev(1) == Z
        assert chebyshev(2) == P("2*z^2 - 1")
        assert chebyshev(3) == P("4*z^3 - 3*z")

    @pytest.mark.parametrize("n", [2, 5, 9, 16])
    def test_cosine_identity(self, n):
        t = chebyshev(n)
        for x in np.linspace(-1, 1, 17):
            assert abs(t(float(x)) - cheb_oracle(n, float(x))) < 1e-9

    def test_semigroup_small(self):
        for m in range(2, 7):
            for n in range(2, 7):
                assert compose(chebyshev(m), chebyshev(n)) == chebyshev(m * n)

    def test_monic(self):
        assert monic_chebyshev(1) == Z
        assert monic_chebyshev(3) == P("z^3 - 3/4*z")
        assert monic_chebyshev(5) == P("z^5 - 5/4*z^3 + 5/16*z")


class TestIterate:
    def test_power(self):
        assert iterate(P("z^2"), 3) == P("z^8")

    def test_chebyshev_conjugate(self):
        assert iterate(P("z^2 - 2"), 2) == P("z^4 - 4*z^2 + 2")

    def test_identity_case(self):
        p = P("z^3 + i*z + 1")
        assert iterate(p, 1) == p

    def test_rejects_nonpositive(self):
        with pytest.raises(PolyError):
            iterate(P("z^2"), 0)


class TestLinearMap:
    def test_conjugate_examples(self):
        m = LinearMap(2, 0)
        assert conjugate(chebyshev(2), m) == P("z^2 - 2")
        assert conjugate(chebyshev(3), m) == P("z^3 - 3*z")
        f = P("z^4 + 3*z")
        assert conjugate(f, LinearMap.identity()) == f

    @given(st.builds(QI, st.fractions(-5, 5, max_denominator=6), st.fractions(-5, 5, max_denominator=6)).filter(bool),
           st.builds(QI, st.fractions(-5, 5, max_denominator=6), st.fractions(-5, 5, max_denominator=6)))
    def test_inverse(self, a, b):
        m = LinearMap(a, b)
        assert m.compose(m.inverse()).is_identity()
        assert m.inverse().inverse() == m

    def test_zero_slope(self):
        with pytest.raises(PolyError):
            LinearMap(0, 1)

    def test_json_round_trip(self):
        m = LinearMap(QI(1, 2), QI(-3))
        assert LinearMap.from_json(m.to_json()) == m


class TestNormalize:
    def test_right_factor_form(self):
        h, pre, post = normalize(P("2*z^2 + 4"))
        assert h == P("z^2")
        assert pre.is_identity()
        assert post == LinearMap(2, 4)

    def test_centered(self):
        h, pre, post = normalize(P("z^3 + 3*z^2"), CENTERED_FORM)
        assert h == P("z^3 - 3*z + 2")
        assert pre == LinearMap(1, -1)

    def test_fixed_point(self):
        f = P("z^3 + i*z")
        h, pre, post = normalize(f)
        assert h == f and pre.is_identity() and post.is_identity()

    def test_constant_rejected(self):
        with pytest.raises(PolyError):
            normalize(P("5"))

    @given(exact_polys(min_degree=1, max_degree=6))
    def test_recomposes(self, f):
        for mode in ("right-factor", CENTERED_FORM):
            h, pre, post = normalize(f, mode)
            assert post(compose(h, pre.inverse().as_poly())) == f


class TestRepresentation:
    def test_zero_degree(self):
        assert Polynomial([]).degree == NEG_INF
        assert (P("z") - P("z")).degree == NEG_INF

    def test_parse_and_format(self):
        f = P("z^3 - 3/4*z + 1/2*i")
        assert f.coeffs == (QI(0, "1/2"), QI("-3/4"), QI(0), QI(1))
        assert P(str(f)) == f

    @given(exact_polys(max_degree=6))
    def test_text_round_trip(self, f):
        assert P(str(f)) == f

    @given(exact_polys(max_degree=6))
    def test_json_round_trip(self, f):
        assert Polynomial.from_json(f.to_json()) == f

    def test_approx_json(self):
        f = P("z^2 + i").to_approx()
        g = Polynomial.from_json(f.to_json())
        assert not g.exact and g.close_to(f, 0)

    def test_division(self):
        q, r = divmod(P("z^3 + 2*z + 1"), P("z + i"))
        assert q * P("z + i") + r == P("z^3 + 2*z + 1")
        assert r.degree <= 0

    def test_approx_stays_finite(self):
        with pytest.raises((PolyError, ArithmeticError, OverflowError)):
            iterate(P("z^2 + 1e200").to_approx(), 3)


class TestRoots:
    def test_simple(self):
        rs = sorted(roots(P("z^2 - 1")), key=lambda t: t[0].real)
        assert [m for _, m in rs] == [1, 1]
        assert abs(rs[0][0] + 1) < 1e-12 and abs(rs[1][0] - 1) < 1e-12

    def test_repeated(self):
        rs = roots(P("(z - i)^3"))
        assert len(rs) == 1 and rs[0][1] == 3 and abs(rs[0][0] - 1j) < 1e-8

    def test_cube_roots(self):
        got = sorted((r for r, _ in roots(P("z^3 - 1"))), key=cmath.phase)
        want = sorted((cmath.exp(2j * math.pi * k / 3) for k in range(3)), key=cmath.phase)
        for a, b in zip(got, want):
            assert abs(a - b) < 1e-12

    def test_mixed_multiplicities(self):
        f = P("z*(z+1)^2*(z-2)^4")
        got = {(round(r.real, 6), m) for r, m in roots(f)}
        assert got == {(0.0, 1), (-1.0, 2), (2.0, 4)}

    def test_close_distinct_roots_kept(self):
        f = P("(z-1)*(z-1-1/1000000)")
        assert sorted(m for _, m in roots(f)) == [1, 1]

    @given(exact_polys(min_degree=1, max_degree=8))
    def test_residuals_and_count(self, f):
        rs = roots(f)
        assert sum(m for _, m in rs) == f.degree
        scale = 1 + f.max_abs_coeff()
        fa = f.to_approx()
        for r, _ in rs:
            assert abs(fa(r)) <= 1e-8 * scale * max(1.0, abs(r)) ** f.degree

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dense_minimax_constant
from polyshare.minimax import (
    HypothesisError,
    MinimaxError,
    least_deviation,
    monic_least_deviation,
    verify_thm21,
    verify_thm22,
    verify_thm23,
)
from polyshare.poly import Polynomial, compose, monic_chebyshev, parse_poly
from polyshare.sets import ConcentricCircles, FinitePoints, Segment

P = parse_poly
UNIT = ConcentricCircles(0, (1.0,))


def nodes(count):
    """Chebyshev extreme points cos(πk/(count-1)) of [-1, 1]."""
    return np.cos(np.pi * np.arange(count) / (count - 1)).astype(complex)


def circle(count):
    return np.exp(2j * np.pi * np.arange(count) / count)


def cvx_oracle(x, f, m):
    cp = pytest.importorskip("cvxpy")
    V = np.vander(x, m + 1, increasing=True)
    br = cp.Variable(m + 1)
    bi = cp.Variable(m + 1)
    re = f.real - (V.real @ br - V.imag @ bi)
    im = f.imag - (V.real @ bi + V.imag @ br)
    t = cp.Variable()
    cons = [cp.norm(cp.vstack([re[k], im[k]])) <= t for k in range(len(x))]
    cp.Problem(cp.Minimize(t), cons).solve()
    return float(t.value)


class TestLeastDeviation:
    def test_even_function(self):
        x = nodes(129)
        res = least_deviation(x, x ** 4, 1)
        ref = dense_minimax_constant((x ** 4).real)
        assert ref == 0.5
        assert res.poly.distance(Polynomial([ref], exact=False)) < 1e-9
        assert abs(res.deviation - 0.5) < 1e-9

    def test_two_points(self):
        res = least_deviation(np.array([1, -1], dtype=complex), np.array([1, -1]), 0)
        assert abs(res.poly(0)) < 1e-12 and abs(res.deviation - 1) < 1e-12

    def test_circle_power(self):
        x = circle(128)
        res = least_deviation(x, x ** 5, 4)
        assert res.poly.max_abs_coeff() < 1e-8 and abs(res.deviation - 1) < 1e-8

    def test_deviation_is_reported_residual(self, rng):
        x = np.array([complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(30)])
        f = np.exp(x)
        res = least_deviation(x, f, 3)
        assert abs(res.deviation - float(np.abs(f - res.poly(x)).max())) <= 1e-12
        assert res.converged

    def test_matches_cone_oracle(self, rng):
        for _ in range(4):
            x = np.array([complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(25)])
            f = np.cos(2 * x) + 1j * x ** 3
            res = least_deviation(x, f, 2)
            assert abs(res.deviation - cvx_oracle(x, f, 2)) < 1e-6

    def test_uniqueness_gate(self):
        with pytest.raises(MinimaxError):
            least_deviation(np.array([0, 1], dtype=complex), np.array([0, 1]), 2)
        with pytest.raises(MinimaxError):
            monic_least_deviation(np.array([0], dtype=complex), 2)

    @settings(max_examples=10)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(0, 3))
    def test_optimality_under_perturbation(self, seed, m):
        r = np.random.default_rng(seed)
        x = r.uniform(-1, 1, 20) + 1j * r.uniform(-1, 1, 20)
        f = np.abs(x) + 1j * x.real ** 2
        res = least_deviation(x, f, m)
        base = res.poly.numpy()
        for scale in (1e-2, 1e-4, 1e-6):
            for _ in range(33):
                q = base + scale * (r.normal(size=base.size) + 1j * r.normal(size=base.size))
                dev = np.abs(f - np.polynomial.polynomial.polyval(x, q)).max()
                assert dev >= res.deviation - 1e-10

    def test_shift_and_scale(self, rng):
        x = nodes(65)
        f = np.abs(x.real) ** 1.5 + 0j
        h = P("1/3*z^2 - z + 2").to_approx()
        base = least_deviation(x, f, 2)
        shifted = least_deviation(x, f + h(x), 2)
        assert shifted.poly.distance(base.poly + h) < 1e-9
        beta = 2 - 1j
        scaled = least_deviation(x, beta * f, 2)
        assert scaled.poly.distance(base.poly * beta) < 1e-9

    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_equioscillation(self, m):
        x = nodes(129).real
        f = np.exp(x)
        res = least_deviation(x.astype(complex), f, m)
        r = (f - res.poly(x.astype(complex))).real
        dev = res.deviation
        # count sign alternations among points where |r| reaches the deviation
        ext = [np.sign(v) for v in r if abs(abs(v) - dev) <= 1e-6]
        alternations = 1 + sum(1 for a, b in zip(ext, ext[1:]) if a != b)
        assert alternations >= m + 2


class TestMonic:
    def test_circle(self):
        res = monic_least_deviation(circle(128), 3)
        assert res.poly.distance(P("z^3").to_approx()) < 1e-8 and abs(res.deviation - 1) < 1e-8

    def test_two_points(self):
        res = monic_least_deviation(np.array([0, 1], dtype=complex), 1)
        assert res.poly.distance(P("z - 1/2").to_approx()) < 1e-12 and abs(res.deviation - 0.5) < 1e-12

    def test_dense_nodes_approach_chebyshev(self):
        # the discrete optimum converges to the continuous one as the nodes
        # come to include the extrema of T_n; 5(k) + 1 nodes contain them exactly
        x = nodes(161)
        res = monic_least_deviation(x, 5)
        assert res.poly.distance(monic_chebyshev(5).to_approx()) < 1e-9
        assert abs(res.deviation - 2 ** -4) < 1e-12


class TestVerify:
    def test_thm21_examples(self):
        rep = verify_thm21(P("z^2 + z"), FinitePoints(np.array([1, -1, 1j])))
        assert rep.passed and rep.max_coeff_gap < 1e-6
        assert verify_thm21(P("z^3"), UNIT).passed

    def test_thm21_two_parameter_oracle(self):
        # direct search over monic quadratics z^2 + a z + b on the 6-point pullback
        from scipy.optimize import minimize

        from polyshare.sets import fiber_cloud

        y, _ = fiber_cloud(P("z^2 + z"), np.array([1, -1, 1j]))

        def obj(v):
            a, b = complex(v[0], v[1]), complex(v[2], v[3])
            return np.abs(y ** 2 + a * y + b).max()

        best = min((minimize(obj, x0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 20000})
                    for x0 in ([1, 0, 0, 0], [0.5, 0.2, 0.1, -0.1])), key=lambda r: r.fun)
        assert abs(best.fun - 1) < 1e-6
        assert abs(best.x[0] - 1) < 1e-4 and np.abs(best.x[1:]).max() < 1e-4

    def test_thm21_off_center(self):
        with pytest.raises(HypothesisError):
            verify_thm21(P("z^2"), FinitePoints(np.array([2, 3])))

    def test_thm22_examples(self):
        assert verify_thm22(P("z^2 + 1"), UNIT, 3).passed
        assert verify_thm22(P("z^2"), Segment(-1, 1), 1, samples=129).passed
        assert verify_thm22(P("3*z + 1"), FinitePoints(np.array([0, 1, 1j])), 2).passed

    def test_thm23_examples(self):
        rep = verify_thm23(P("z^2"), Segment(-1, 1), P("z^4"), 1, samples=129)
        assert rep.passed and rep.deviation_gap < 1e-6
        rep = verify_thm23(P("z^2 + i"), UNIT, P("z^2 - 1"), 2)
        assert rep.passed and rep.details["deviation"] < 1e-9
        rep = verify_thm23(P("z^2"), UNIT, P("z^3"), 2)
        assert rep.passed

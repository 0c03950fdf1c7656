import os
import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from polyshare.poly import Polynomial
from polyshare.scalar import QI

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

small_fraction = st.fractions(min_value=-3, max_value=3, max_denominator=4)


@st.composite
def gaussian_rationals(draw, real_only=False):
    re = draw(small_fraction)
    im = Fraction(0) if real_only else draw(small_fraction)
    return QI(re, im)


@st.composite
def exact_polys(draw, min_degree=0, max_degree=5, monic=False, real_only=False):
    n = draw(st.integers(min_degree, max_degree))
    coeffs = [draw(gaussian_rationals(real_only)) for _ in range(n)]
    lead = QI(1) if monic else draw(gaussian_rationals(real_only).filter(bool))
    return Polynomial(coeffs + [lead], exact=True)


def random_qi(rng: random.Random, den: int = 4, span: int = 3, real_only=False) -> QI:
    re = Fraction(rng.randint(-span * den, span * den), den)
    im = Fraction(0) if real_only else Fraction(rng.randint(-span * den, span * den), den)
    return QI(re, im)


def random_poly(rng: random.Random, n: int, monic=False, den=4, real_only=False) -> Polynomial:
    cs = [random_qi(rng, den, real_only=real_only) for _ in range(n)]
    lead = QI(1)
    if not monic:
        lead = QI(0)
        while not lead:
            lead = random_qi(rng, den, real_only=real_only)
    return Polynomial(cs + [lead], exact=True)


@pytest.fixture
def rng():
    return random.Random(20261016)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance")
    order = ["1", "2", "3", "4", "5", "6a", "6b", "7", "8", "9", "10", "11", "12"]
    for key in order:
        if key in RESULTS:
            terminalreporter.write_line(RESULTS[key])

"""Functional decomposition: right factors, chains, common right components,
P-adic digits, fiber means and the power/Chebyshev/rotational normal forms."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Optional

from .poly import (
    NEG_INF,
    LinearMap,
    Polynomial,
    PolyError,
    chebyshev,
    compose,
    normalize,
)
from .scalar import QI, ZERO, exact_sqrt, is_exact

__all__ = [
    "INFINITE",
    "Decomposition",
    "PadicExpansion",
    "RotationalStructure",
    "right_factor",
    "full_decomposition",
    "gcrc",
    "padic_expand",
    "fiber_average",
    "rotational_structure",
    "power_structure",
    "chebyshev_structure",
    "divisors",
    "DecomposeError",
]

INFINITE = "Infinite"
APPROX_RTOL = 1e-9


class DecomposeError(ValueError):
    pass


def divisors(n: int) -> list[int]:
    return [k for k in range(1, n + 1) if n % k == 0]


def _is_const_digit(a: Polynomial, scale: float) -> bool:
    if a.degree == NEG_INF or a.degree <= 0:
        return True
    if a.exact:
        return False
    return max(abs(complex(c)) for c in a.coeffs[1:]) <= APPROX_RTOL * scale


# -- P-adic expansion ---------------------------------------------------------

@dataclass(frozen=True)
class PadicExpansion:
    base: Polynomial
    digits: tuple

    def recompose(self) -> Polynomial:
        acc = Polynomial._raw([], self.base.exact)
        for a in reversed(self.digits):
            acc = acc * self.base + a
        return acc


def padic_expand(Q: Polynomial, P: Polynomial) -> PadicExpansion:
    """Digits ``a_0, ..., a_k`` with ``Q = sum a_i P^i`` and ``deg a_i < deg P``."""
    if P.degree == NEG_INF or P.degree < 1:
        raise PolyError("padic_expand needs deg P >= 1")
    if Q.degree == NEG_INF:
        return PadicExpansion(P, (Q,))
    k = Q.degree // P.degree
    digits = []
    rest = Q
    for _ in range(k + 1):
        rest, r = divmod(rest, P)
        digits.append(r)
    return PadicExpansion(P, tuple(digits))


# -- right factors --------------------------------------------------------------

def _approx_root_series(coeffs: list, alpha, count: int, exact: bool) -> list:
    """First ``count`` coefficients of ``F**alpha`` for a series ``F`` with ``F[0] = 1``."""
    g = [QI(1) if exact else 1 + 0j]
    for k in range(1, count):
        acc = ZERO if exact else 0j
        for j in range(1, k + 1):
            fj = coeffs[j] if j < len(coeffs) else (ZERO if exact else 0j)
            if fj:
                acc = acc + ((alpha + 1) * j - k) * fj * g[k - j]
        g.append(acc / k)
    return g


def _candidate_right_factor(f: Polynomial, r: int) -> Polynomial:
    """The monic ``h`` with ``h(0) = 0`` and ``deg h = r`` whose ``s``-th power
    agrees with ``f/lead`` in the top ``r`` coefficients."""
    n = f.degree
    s = n // r
    F = f / f.lead
    rev = list(reversed(F.coeffs))  # rev[0] = 1
    alpha = QI(Fraction(1, s)) if f.exact else 1.0 / s
    g = _approx_root_series(rev, alpha, r, f.exact)
    zero = ZERO if f.exact else 0j
    # h = z^r + g_1 z^(r-1) + ... + g_(r-1) z
    cs = [zero] + [g[r - k] for k in range(1, r)] + [QI(1) if f.exact else 1 + 0j]
    return Polynomial._raw(cs, f.exact)


def _outer_from_digits(f: Polynomial, h: Polynomial):
    exp = padic_expand(f, h)
    scale = max(1.0, f.max_abs_coeff())
    if not all(_is_const_digit(a, scale) for a in exp.digits):
        return None
    g = Polynomial._raw([a.coeff(0) for a in exp.digits], f.exact)
    if not f.exact and not compose(g, h).close_to(f, APPROX_RTOL):
        return None
    return g


def right_factor(f: Polynomial, r: int) -> Optional[tuple]:
    """``(g, h)`` with ``f = g∘h``, ``deg h = r``, ``h`` monic and ``h(0) = 0``; else ``None``.

    In characteristic zero such ``h`` is unique, so the candidate computed from
    the top coefficients is the only one that needs checking.
    """
    n = f.degree
    if n == NEG_INF or r < 2 or r >= n or n % r:
        raise DecomposeError(f"{r} is not a proper divisor of deg f = {n}")
    h = _candidate_right_factor(f, r)
    g = _outer_from_digits(f, h)
    if g is None:
        return None
    return g, h


def _right_factor_any(f: Polynomial, r: int) -> Optional[tuple]:
    """Like :func:`right_factor` but also allows ``r = 1`` and ``r = deg f``."""
    n = f.degree
    one = QI(1) if f.exact else 1 + 0j
    if r == 1:
        return f, Polynomial._raw([ZERO if f.exact else 0j, one], f.exact)
    if r == n:
        h, _, post = normalize(f)
        return post.as_poly(), h
    return right_factor(f, r)


# -- full decomposition ----------------------------------------------------------

@dataclass(frozen=True)
class Decomposition:
    """``outer∘chain[0]∘...∘chain[-1]∘inner`` reproduces the input."""

    chain: tuple
    outer: LinearMap
    inner: LinearMap

    def recompose(self) -> Polynomial:
        acc = self.inner.as_poly()
        for p in reversed(self.chain):
            acc = compose(p, acc)
        return self.outer(acc)

    @property
    def degrees(self) -> list[int]:
        return [p.degree for p in self.chain]


def full_decomposition(f: Polynomial) -> Decomposition:
    """Maximal chain, splitting off the smallest admissible right factor first."""
    n = f.degree
    if n == NEG_INF or n < 1:
        raise PolyError("full_decomposition needs deg f >= 1")
    if n == 1:
        return Decomposition((), LinearMap(f.coeff(1), f.coeff(0)), LinearMap.identity())
    h, _, post = normalize(f)
    inner_first: list[Polynomial] = []
    rest = h
    while True:
        m = rest.degree
        for r in divisors(m)[1:-1]:
            found = right_factor(rest, r)
            if found is not None:
                rest, k = found
                inner_first.append(k)
                break
        else:
            inner_first.append(rest)
            break
    return Decomposition(tuple(reversed(inner_first)), post, LinearMap.identity())


# -- greatest common right component -----------------------------------------------

def gcrc(f1: Polynomial, f2: Polynomial) -> tuple:
    """``(W, A, B)`` with ``f1 = A∘W``, ``f2 = B∘W`` and ``deg W`` maximal."""
    for f in (f1, f2):
        if f.degree == NEG_INF or f.degree < 1:
            raise PolyError("gcrc needs nonconstant inputs")
    g = math.gcd(f1.degree, f2.degree)
    for d in reversed(divisors(g)):
        a = _right_factor_any(f1, d)
        if a is None:
            continue
        b = _right_factor_any(f2, d)
        if b is None:
            continue
        if a[1].close_to(b[1], APPROX_RTOL):
            return a[1], a[0], b[0]
    raise AssertionError("degree-1 common component always exists")


# -- fiber averages ------------------------------------------------------------------

def fiber_power_sums(P: Polynomial) -> list:
    """``p_k`` = sum of ``y^k`` over the roots of ``P(y) - w``, for ``0 <= k < deg P``.

    For ``k < deg P`` these do not depend on ``w``.
    """
    n = P.degree
    lead = P.lead
    exact = P.exact
    e = [QI(1) if exact else 1 + 0j]
    for k in range(1, n):
        e.append((-1) ** k * P.coeff(n - k) / lead)
    p = [QI(n) if exact else complex(n)]
    for k in range(1, n):
        acc = ZERO if exact else 0j
        for j in range(1, k):
            acc = acc + (-1) ** (j - 1) * e[j] * p[k - j]
        acc = acc + (-1) ** (k - 1) * k * e[k]
        p.append(acc)
    return p


def fiber_average(Q: Polynomial, P: Polynomial) -> Polynomial:
    """``Q_P(z)``: the mean of ``Q`` over the fiber ``P⁻¹(P(z))`` with multiplicity."""
    n = P.degree
    if n == NEG_INF or n < 1:
        raise PolyError("fiber_average needs deg P >= 1")
    exact = Q.exact and P.exact
    if not exact:
        Q, P = Q.to_approx(), P.to_approx()
    sums = fiber_power_sums(P)
    means = []
    for a in padic_expand(Q, P).digits:
        acc = ZERO if exact else 0j
        for k, c in enumerate(a.coeffs):
            acc = acc + c * sums[k]
        means.append(acc / n)
    return compose(Polynomial._raw(means, exact), P)


# -- normal forms ------------------------------------------------------------------

def _center(f: Polynomial):
    n = f.degree
    return -f.coeff(n - 1) / (f.lead * n)


@dataclass(frozen=True)
class RotationalStructure:
    """``f(z) = outer((z-c)^a · R((z-c)^b))``; for ``order = INFINITE``,
    ``f(z) = outer(R((z-c)^n))`` with ``R`` linear."""

    center: object
    order: object
    residue: int
    inner_poly: Polynomial
    outer: LinearMap
    degree: int

    def generator(self) -> Optional[LinearMap]:
        if self.order == INFINITE:
            return None
        eps = cmath.exp(2j * math.pi / self.order)
        c = complex(self.center)
        return LinearMap(eps, c - eps * c)

    def recompose(self) -> Polynomial:
        shift = Polynomial([-self.center, 1]) if is_exact(self.center) else Polynomial(
            [-complex(self.center), 1]
        )
        if self.order == INFINITE:
            core = compose(self.inner_poly, shift ** self.degree)
        else:
            core = (shift ** self.residue) * compose(self.inner_poly, shift ** self.order)
        return self.outer(core)

    def symmetry_residual(self, f: Polynomial, samples: int = 16) -> float:
        """Max of ``|f(ε(z-c)+c) - (ε^a (f(z) - f(c)) + f(c))|`` at sample points."""
        if self.order == INFINITE:
            return 0.0
        eps = cmath.exp(2j * math.pi / self.order)
        c = complex(self.center)
        fc = complex(f(c))
        worst = 0.0
        for k in range(samples):
            z = c + 0.7 * cmath.exp(1j * (0.3 + k))
            lhs = complex(f(eps * (z - c) + c))
            rhs = eps ** self.residue * (complex(f(z)) - fc) + fc
            worst = max(worst, abs(lhs - rhs) / (1 + abs(rhs)))
        return worst


def rotational_structure(f: Polynomial) -> RotationalStructure:
    n = f.degree
    if n == NEG_INF or n < 2:
        raise PolyError("rotational_structure needs deg f >= 2")
    c = _center(f)
    g = compose(f, Polynomial([c, 1], exact=f.exact))
    scale = max(1.0, g.max_abs_coeff())
    if not g.exact:
        cs = [0j if abs(x) <= APPROX_RTOL * scale else x for x in g.coeffs]
        g = Polynomial._raw(cs, False)
    fc = g.coeff(0)
    exps = [k for k in range(1, n + 1) if g.coeff(k)]
    outer = LinearMap(1, fc)
    zero = ZERO if g.exact else 0j
    if len(exps) == 1:
        return RotationalStructure(c, INFINITE, 0, Polynomial._raw([zero, g.lead], g.exact), outer, n)
    b = reduce(math.gcd, (e - exps[0] for e in exps[1:]))
    a = n % b
    r_coeffs = [zero] * ((n - a) // b + 1)
    for e in exps:
        r_coeffs[(e - a) // b] = g.coeff(e)
    R = Polynomial._raw(r_coeffs, g.exact)
    return RotationalStructure(c, b, a, R, outer, n)


def power_structure(f: Polynomial) -> Optional[tuple]:
    """``(σ, λ, n)`` with ``f = σ∘z^n∘λ`` and ``λ = z - c``; ``None`` if ``f`` is not a shifted power."""
    n = f.degree
    if n == NEG_INF or n < 2:
        raise PolyError("power_structure needs deg f >= 2")
    c = _center(f)
    shift = Polynomial([c, 1], exact=f.exact)
    fc = f(c)
    g = compose(f, shift) - fc
    target = Polynomial.monomial(n, f.lead, exact=f.exact)
    if not g.close_to(target, APPROX_RTOL):
        return None
    return LinearMap(f.lead, fc), LinearMap(1, -c), n


def _complex_sqrt(x) -> complex:
    return cmath.sqrt(complex(x))


def chebyshev_structure(f: Polynomial) -> Optional[tuple]:
    """``(σ, λ, n)`` with ``f = σ∘T_n∘λ``, or ``None``.

    ``λ = α(z - c)`` is read off from the two leading coefficients after
    centering and ``σ`` from the leading and constant terms; the result is
    accepted only after recomposition (exact, else relative 1e-9).  Maps are
    exact when ``α`` lies in Q(i), approximate otherwise.
    """
    n = f.degree
    if n == NEG_INF or n < 2:
        raise PolyError("chebyshev_structure needs deg f >= 2")
    c = _center(f)
    g = compose(f, Polynomial([c, 1], exact=f.exact))
    gn = g.lead
    if n == 2:
        alpha = QI(Fraction(1, 2)) if g.exact else 0.5 + 0j
    else:
        gm = g.coeff(n - 2)
        if not gm or (not g.exact and abs(gm) <= APPROX_RTOL * max(1.0, g.max_abs_coeff())):
            return None
        sq = -n * gn / (4 * gm)
        alpha = exact_sqrt(sq) if is_exact(sq) else None
        if alpha is None:
            alpha = _complex_sqrt(sq)
    exact = is_exact(alpha) and g.exact
    if not exact:
        alpha, gn, c = complex(alpha), complex(gn), complex(c)
    A = gn / (2 ** (n - 1) * alpha ** n)
    t0 = chebyshev(n).coeff(0)
    B = g(0) - A * t0 if exact else complex(g(0)) - A * complex(t0)
    sigma = LinearMap(A, B)
    lam = LinearMap(alpha, -alpha * c)
    rebuilt = sigma(compose(chebyshev(n), lam.as_poly()))
    if not rebuilt.close_to(f if exact else f.to_approx(), APPROX_RTOL):
        return None
    return sigma, lam, n

"""Univariate polynomials over Q(i) (exact) or complex doubles (approximate)."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from gmpy2 import mpq

from .scalar import ONE, QI, ZERO, ScalarError, as_scalar, format_scalar, is_exact

__all__ = [
    "Polynomial",
    "LinearMap",
    "NEG_INF",
    "PolyError",
    "compose",
    "chebyshev",
    "monic_chebyshev",
    "iterate",
    "conjugate",
    "normalize",
    "RIGHT_FACTOR_FORM",
    "CENTERED_FORM",
    "parse_poly",
    "Z",
]

NEG_INF = float("-inf")
RIGHT_FACTOR_FORM = "right-factor"
CENTERED_FORM = "centered"


class PolyError(ValueError):
    """Invalid polynomial input (bad degree, bad text, overflow)."""


def _strip(coeffs: list) -> list:
    n = len(coeffs)
    while n and not coeffs[n - 1]:
        n -= 1
    return coeffs[:n]


class Polynomial:
    """Immutable univariate polynomial with ascending coefficients.

    All coefficients share one flavor: ``QI`` (exact) or ``complex``
    (approximate).  Constructing from a mix of exact and floating inputs yields
    an approximate polynomial.  The zero polynomial has no coefficients and
    degree ``NEG_INF``.
    """

    __slots__ = ("_c", "_exact")

    def __init__(self, coeffs: Iterable = (), exact: bool | None = None):
        cs = list(coeffs)
        if exact is None:
            exact = all(
                is_exact(c) or isinstance(c, (int, Fraction)) or type(c).__name__ == "mpq"
                for c in cs
            )
        cs = [as_scalar(c, exact) for c in cs]
        self._c = tuple(_strip(cs))
        self._exact = bool(exact)

    @classmethod
    def _raw(cls, coeffs: Sequence, exact: bool) -> "Polynomial":
        p = object.__new__(cls)
        p._c = tuple(_strip(list(coeffs)))
        p._exact = exact
        return p

    # -- basic properties ------------------------------------------------
    @property
    def coeffs(self) -> tuple:
        return self._c

    @property
    def exact(self) -> bool:
        return self._exact

    @property
    def degree(self):
        return len(self._c) - 1 if self._c else NEG_INF

    @property
    def lead(self):
        if not self._c:
            raise PolyError("zero polynomial has no leading coefficient")
        return self._c[-1]

    def is_zero(self) -> bool:
        return not self._c

    def coeff(self, k: int):
        if 0 <= k < len(self._c):
            return self._c[k]
        return ZERO if self._exact else 0j

    def _zero(self):
        return ZERO if self._exact else 0j

    @staticmethod
    def constant(c, exact: bool | None = None) -> "Polynomial":
        return Polynomial([c], exact=exact)

    @staticmethod
    def monomial(k: int, c=1, exact: bool | None = None) -> "Polynomial":
        zero = 0 if exact is not False else 0.0
        return Polynomial([zero] * k + [c], exact=exact)

    def to_approx(self) -> "Polynomial":
        if not self._exact:
            return self
        return Polynomial._raw([complex(c) for c in self._c], False)

    def to_exact(self) -> "Polynomial":
        """Exact binary value of each coefficient."""
        if self._exact:
            return self
        return Polynomial([as_scalar(c, True) for c in self._c], exact=True)

    def numpy(self) -> np.ndarray:
        """Ascending complex coefficient array."""
        return np.array([complex(c) for c in self._c], dtype=complex)

    def max_abs_coeff(self) -> float:
        return max((abs(complex(c)) for c in self._c), default=0.0)

    # -- arithmetic ------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Polynomial):
            return other
        return Polynomial([other])

    @staticmethod
    def _flavor(a: "Polynomial", b: "Polynomial"):
        if a._exact and b._exact:
            return a, b, True
        return a.to_approx(), b.to_approx(), False

    def __add__(self, other):
        a, b, ex = Polynomial._flavor(self, self._coerce(other))
        n = max(len(a._c), len(b._c))
        z = ZERO if ex else 0j
        out = [(a._c[i] if i < len(a._c) else z) + (b._c[i] if i < len(b._c) else z) for i in range(n)]
        return Polynomial._raw(out, ex)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw([-c for c in self._c], self._exact)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            s = as_scalar(other)
            if self._exact and is_exact(s):
                return Polynomial._raw([c * s for c in self._c], True)
            return Polynomial._raw([complex(c) * complex(s) for c in self._c], False)
        a, b, ex = Polynomial._flavor(self, other)
        if not a._c or not b._c:
            return Polynomial._raw([], ex)
        if not ex:
            return Polynomial._raw(list(np.convolve(a.numpy(), b.numpy())), False)
        return Polynomial._raw(_qi_convolve(a._c, b._c), True)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Polynomial):
            q, r = divmod(self, other)
            if not r.is_zero():
                raise PolyError("inexact polynomial division")
            return q
        s = as_scalar(other)
        if not s:
            raise ZeroDivisionError("division by zero scalar")
        if self._exact and is_exact(s):
            inv = s.inverse()
            return Polynomial._raw([c * inv for c in self._c], True)
        return Polynomial._raw([complex(c) / complex(s) for c in self._c], False)

    def __pow__(self, k: int):
        if k < 0:
            raise PolyError("negative power")
        result = Polynomial._raw([ONE if self._exact else 1 + 0j], self._exact)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __divmod__(self, other: "Polynomial"):
        a, b, ex = Polynomial._flavor(self, self._coerce(other))
        if b.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(a._c)
        db = len(b._c) - 1
        if len(rem) - 1 < db:
            return Polynomial._raw([], ex), a
        inv_lead = b._c[-1].inverse() if ex else 1 / b._c[-1]
        q = [ZERO if ex else 0j] * (len(rem) - db)
        for k in range(len(rem) - 1 - db, -1, -1):
            c = rem[k + db] * inv_lead
            q[k] = c
            if c:
                for j in range(db + 1):
                    rem[k + j] = rem[k + j] - c * b._c[j]
            rem[k + db] = ZERO if ex else 0j
        return Polynomial._raw(q, ex), Polynomial._raw(rem[:db], ex)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    # -- evaluation / composition -----------------------------------------
    def __call__(self, x):
        if isinstance(x, Polynomial):
            return compose(self, x)
        if isinstance(x, LinearMap):
            return compose(self, x.as_poly())
        if isinstance(x, np.ndarray):
            c = self.numpy()
            out = np.zeros(x.shape, dtype=complex)
            for coef in c[::-1]:
                out = out * x + coef
            return out
        if self._exact and (is_exact(x) or isinstance(x, (int, Fraction))):
            x = as_scalar(x)
            acc = ZERO
            for c in reversed(self._c):
                acc = acc * x + c
            return acc
        x = complex(x)
        acc = 0j
        for c in reversed(self._c):
            acc = acc * x + complex(c)
        if not (math.isfinite(acc.real) and math.isfinite(acc.imag)):
            raise ScalarError("polynomial evaluation overflowed")
        return acc

    def derivative(self, k: int = 1) -> "Polynomial":
        cs = list(self._c)
        for _ in range(k):
            cs = [c * i for i, c in enumerate(cs)][1:]
        return Polynomial._raw(cs, self._exact)

    def monic(self) -> "Polynomial":
        return self / self.lead

    def shift(self, k: int) -> "Polynomial":
        """Multiply by ``z**k``."""
        return Polynomial._raw([self._zero()] * k + list(self._c), self._exact)

    # -- comparison --------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Polynomial):
            if self._exact != other._exact:
                return False
            return self._c == other._c
        if not self._c:
            return other == 0
        return len(self._c) == 1 and self._c[0] == other

    def __hash__(self):
        return hash((self._exact, self._c))

    def distance(self, other: "Polynomial") -> float:
        """Max coefficient gap."""
        d = (self.to_approx() - other.to_approx()).numpy()
        return float(np.max(np.abs(d))) if d.size else 0.0

    def close_to(self, other: "Polynomial", rtol: float = 1e-9) -> bool:
        """Exact equality for two exact inputs, else coefficient gap within ``rtol``."""
        if self._exact and other._exact:
            return self == other
        scale = max(1.0, self.max_abs_coeff(), other.max_abs_coeff())
        return self.distance(other) <= rtol * scale

    # -- text ----------------------------------------------------------------
    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Polynomial({format_poly(self)!r}{'' if self._exact else ', approx'})"

    # -- JSON ----------------------------------------------------------------
    def to_json(self) -> list:
        if self._exact:
            return [
                [int(c.re.numerator), int(c.re.denominator), int(c.im.numerator), int(c.im.denominator)]
                for c in self._c
            ]
        return [[complex(c).real, complex(c).imag] for c in self._c]

    @staticmethod
    def from_json(data: list) -> "Polynomial":
        if all(len(row) == 4 for row in data) and data:
            return Polynomial(
                [QI(Fraction(a, b), Fraction(c, d)) for a, b, c, d in data], exact=True
            )
        if all(len(row) == 2 for row in data):
            return Polynomial([complex(a, b) for a, b in data], exact=False)
        raise PolyError("bad polynomial JSON")


def _mpq_convolve(x: list, y: list) -> list:
    out = [mpq(0)] * (len(x) + len(y) - 1)
    for i, u in enumerate(x):
        if u:
            for j, v in enumerate(y):
                if v:
                    out[i + j] += u * v
    return out


def _qi_convolve(a: list, b: list) -> list:
    """Product of exact coefficient lists on the rational parts, skipping zero imaginary parts."""
    ar, ai = [c.re for c in a], [c.im for c in a]
    br, bi = [c.re for c in b], [c.im for c in b]
    re = _mpq_convolve(ar, br)
    a_real, b_real = not any(ai), not any(bi)
    if a_real and b_real:
        return [QI(r) for r in re]
    im = [mpq(0)] * len(re)
    if not b_real:
        im = [s + t for s, t in zip(im, _mpq_convolve(ar, bi))]
    if not a_real:
        im = [s + t for s, t in zip(im, _mpq_convolve(ai, br))]
        if not b_real:
            re = [s - t for s, t in zip(re, _mpq_convolve(ai, bi))]
    return [QI(r, i) for r, i in zip(re, im)]


Z = Polynomial([0, 1])


def compose(g: Polynomial, f: Polynomial) -> Polynomial:
    """``g∘f`` by Horner's scheme."""
    if not g._c:
        return g
    exact = g.exact and f.exact
    if not exact:
        g, f = g.to_approx(), f.to_approx()
    acc = Polynomial._raw([g._c[-1]], exact)
    for c in reversed(g._c[:-1]):
        acc = acc * f + Polynomial._raw([c], exact)
    return acc


@lru_cache(maxsize=256)
def chebyshev(n: int) -> Polynomial:
    """Chebyshev polynomial of the first kind, ``T_n(cos x) = cos(n x)``."""
    if n < 0:
        raise PolyError("chebyshev index must be nonnegative")
    # integer recurrence, converted once
    t0, t1 = [1], [0, 1]
    if n == 0:
        return Polynomial(t0)
    for _ in range(n - 1):
        nxt = [0] + [2 * c for c in t1]
        for k, c in enumerate(t0):
            nxt[k] -= c
        t0, t1 = t1, nxt
    return Polynomial(t1)


def monic_chebyshev(n: int) -> Polynomial:
    if n < 1:
        raise PolyError("monic_chebyshev needs n >= 1")
    return chebyshev(n) / QI(2) ** (n - 1)


def iterate(p: Polynomial, s: int) -> Polynomial:
    """``s``-fold composition of ``p`` with itself."""
    if s < 1:
        raise PolyError("iterate needs s >= 1")
    out = p
    for _ in range(s - 1):
        out = compose(p, out)
    if not out.exact:
        c = out.numpy()
        if not np.all(np.isfinite(c)):
            raise PolyError("approximate iterate overflowed")
    return out


@dataclass(frozen=True)
class LinearMap:
    """The affine map ``z -> a*z + b`` with ``a != 0``."""

    a: object = ONE
    b: object = ZERO

    def __post_init__(self):
        exact = is_exact(as_scalar(self.a)) and is_exact(as_scalar(self.b))
        a = as_scalar(self.a, exact)
        b = as_scalar(self.b, exact)
        if not a:
            raise PolyError("linear map needs a nonzero slope")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @staticmethod
    def identity() -> "LinearMap":
        return LinearMap(ONE, ZERO)

    @property
    def exact(self) -> bool:
        return is_exact(self.a) and is_exact(self.b)

    def __call__(self, x):
        if isinstance(x, Polynomial):
            return x * self.a + self.b
        if isinstance(x, LinearMap):
            return self.compose(x)
        if isinstance(x, np.ndarray):
            return complex(self.a) * x + complex(self.b)
        return self.a * x + self.b

    def compose(self, inner: "LinearMap") -> "LinearMap":
        """``self∘inner``."""
        return LinearMap(self.a * inner.a, self.a * inner.b + self.b)

    def inverse(self) -> "LinearMap":
        inv = self.a.inverse() if is_exact(self.a) else 1 / self.a
        return LinearMap(inv, -self.b * inv)

    def as_poly(self) -> Polynomial:
        return Polynomial([self.b, self.a])

    def is_identity(self) -> bool:
        return self.a == 1 and self.b == 0

    def close_to(self, other: "LinearMap", tol: float = 1e-9) -> bool:
        return abs(complex(self.a) - complex(other.a)) <= tol and abs(
            complex(self.b) - complex(other.b)
        ) <= tol

    def __str__(self):
        return f"z -> {format_poly(self.as_poly())}"

    def to_json(self) -> list:
        """``[b, a]`` in the polynomial coefficient row format."""
        if self.exact:
            return [
                [int(c.re.numerator), int(c.re.denominator), int(c.im.numerator), int(c.im.denominator)]
                for c in (self.b, self.a)
            ]
        return [[complex(c).real, complex(c).imag] for c in (self.b, self.a)]

    @staticmethod
    def from_json(data: list) -> "LinearMap":
        p = Polynomial.from_json(data)
        return LinearMap(p.coeff(1), p.coeff(0))


def conjugate(f: Polynomial, m: LinearMap) -> Polynomial:
    """``m∘f∘m⁻¹``."""
    return m(compose(f, m.inverse().as_poly()))


def normalize(f: Polynomial, mode: str = RIGHT_FACTOR_FORM):
    """Return ``(h, pre, post)`` with ``f = post∘h∘pre⁻¹``.

    ``right-factor``: ``h`` monic with ``h(0) = 0`` and ``pre`` the identity.
    ``centered``: ``h = f∘pre / lead`` is monic with vanishing ``z^(n-1)``
    coefficient; ``pre`` is the shift moving the origin to the root centroid.
    """
    n = f.degree
    if n == NEG_INF or n < 1:
        raise PolyError("normalize needs a nonconstant polynomial")
    lead = f.lead
    if mode == RIGHT_FACTOR_FORM:
        c0 = f.coeff(0)
        h = (f - c0) / lead
        return h, LinearMap.identity(), LinearMap(lead, c0)
    if mode == CENTERED_FORM:
        shift = -f.coeff(n - 1) / (lead * n)
        pre = LinearMap(1, shift)
        h = compose(f, pre.as_poly()) / lead
        return h, pre, LinearMap(lead, 0)
    raise PolyError(f"unknown normalization mode {mode!r}")


# -- text format --------------------------------------------------------------

def format_poly(p: Polynomial, var: str = "z") -> str:
    if p.is_zero():
        return "0"
    parts = []
    for k in range(len(p.coeffs) - 1, -1, -1):
        c = p.coeffs[k]
        if not c:
            continue
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        cs = format_scalar(c)
        neg = False
        if cs.startswith("-") and not cs.startswith("-(") and "+" not in cs[1:]:
            neg, cs = True, cs[1:]
        if mono:
            if cs == "1":
                term = mono
            else:
                term = f"{cs}*{mono}"
        else:
            term = cs
        parts.append(("-" if neg else "+", term))
    sign, first = parts[0]
    out = ("-" if sign == "-" else "") + first
    for sign, term in parts[1:]:
        out += f" {sign} {term}"
    return out


_TOKEN = re.compile(r"\s*(?:(\d+\.\d*(?:[eE][-+]?\d+)?|\d*\.\d+(?:[eE][-+]?\d+)?|\d+(?:[eE][-+]?\d+)?)|(\*\*|[-+*/^()])|([A-Za-z_]\w*))")


def _tokenize(text: str) -> list:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise PolyError(f"unexpected character at {pos} in {text!r}")
        num, op, name = m.groups()
        if num is not None:
            out.append(("num", num))
        elif op is not None:
            out.append(("op", "^" if op == "**" else op))
        else:
            out.append(("name", name))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens, var):
        self.t = tokens
        self.i = 0
        self.var = var

    def peek(self):
        return self.t[self.i] if self.i < len(self.t) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expr(self):
        node = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            node = node + rhs if op == "+" else node - rhs
        return node

    def term(self):
        node = self.unary()
        while True:
            tok = self.peek()
            if tok == ("op", "*"):
                self.take()
                node = node * self.unary()
            elif tok == ("op", "/"):
                self.take()
                rhs = self.unary()
                if rhs.degree == NEG_INF or rhs.degree > 0:
                    raise PolyError("division only by nonzero constants")
                node = node / rhs.coeffs[0]
            elif tok[0] in ("num", "name") or tok == ("op", "("):
                node = node * self.unary()  # implicit product, e.g. 2z or 3(z+1)
            else:
                return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return -self.unary()
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            tok = self.take()
            neg = False
            if tok == ("op", "-"):
                neg, tok = True, self.take()
            if tok[0] != "num" or not tok[1].isdigit() or neg:
                raise PolyError("exponents must be nonnegative integers")
            return base ** int(tok[1])
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return Polynomial([QI(Fraction(val))])
        if kind == "name":
            if val == self.var:
                return Z
            if val == "i":
                return Polynomial([QI(0, 1)])
            raise PolyError(f"unknown symbol {val!r}")
        if (kind, val) == ("op", "("):
            node = self.expr()
            if self.take() != ("op", ")"):
                raise PolyError("unbalanced parentheses")
            return node
        raise PolyError(f"unexpected token {val!r}")


def parse_poly(text: str, var: str = "z") -> Polynomial:
    """Parse text like ``z^3 - 3/4*z + 1/2*i`` into an exact polynomial."""
    tokens = _tokenize(text)
    if not tokens:
        raise PolyError("empty polynomial text")
    p = _Parser(tokens, var)
    node = p.expr()
    if p.i != len(tokens):
        raise PolyError(f"trailing input in {text!r}")
    return node

"""Coefficient scalars: exact Gaussian rationals and approximate complex numbers.

Exact values are instances of :class:`QI` (a pair of ``gmpy2.mpq``).  Approximate
values are plain Python ``complex``.  Mixing the two always degrades to
``complex``.
"""

from __future__ import annotations

import cmath
import math
import numbers
from fractions import Fraction

import gmpy2
from gmpy2 import mpq

__all__ = [
    "QI",
    "I",
    "ONE",
    "ZERO",
    "as_scalar",
    "is_exact",
    "to_complex",
    "exact_sqrt",
    "exact_root",
    "snap",
    "ScalarError",
]


class ScalarError(ArithmeticError):
    """Raised for non-finite approximate values or division by zero."""


def _q(x) -> mpq:
    if isinstance(x, type(mpq())):
        return x
    if isinstance(x, (int, Fraction)):
        return mpq(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ScalarError(f"non-finite value {x!r}")
        return mpq(x)
    if isinstance(x, str):
        return mpq(Fraction(x))
    return mpq(x)


class QI:
    """Gaussian rational ``re + im*i`` with arbitrary-precision rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _q(re))
        object.__setattr__(self, "im", _q(im))

    def __setattr__(self, name, value):
        raise AttributeError("QI is immutable")

    # -- conversions -----------------------------------------------------
    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def is_real(self) -> bool:
        return not self.im

    def conjugate(self) -> "QI":
        return QI(self.re, -self.im)

    def norm2(self) -> mpq:
        return self.re * self.re + self.im * self.im

    # -- arithmetic ------------------------------------------------------
    @staticmethod
    def _coerce(other):
        if isinstance(other, QI):
            return other
        if isinstance(other, (int, Fraction)) or isinstance(other, type(mpq())):
            return QI(other)
        return None

    def __add__(self, other):
        o = QI._coerce(other)
        if o is None:
            return complex(self) + other
        return QI(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return QI(-self.re, -self.im)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = QI._coerce(other)
        if o is None:
            return complex(self) - other
        return QI(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = QI._coerce(other)
        if o is None:
            return other - complex(self)
        return QI(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = QI._coerce(other)
        if o is None:
            return complex(self) * other
        if not self.im and not o.im:
            return QI(self.re * o.re, 0)
        return QI(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def inverse(self) -> "QI":
        n = self.norm2()
        if not n:
            raise ZeroDivisionError("division by exact zero")
        return QI(self.re / n, -self.im / n)

    def __truediv__(self, other):
        o = QI._coerce(other)
        if o is None:
            return complex(self) / other
        if not o.im:
            if not o.re:
                raise ZeroDivisionError("division by exact zero")
            return QI(self.re / o.re, self.im / o.re)
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = QI._coerce(other)
        if o is None:
            return other / complex(self)
        return o * self.inverse()

    def __pow__(self, k):
        if not isinstance(k, numbers.Integral):
            return complex(self) ** k
        if k < 0:
            return self.inverse() ** (-k)
        result, base = ONE, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- comparison ------------------------------------------------------
    def __eq__(self, other):
        o = QI._coerce(other)
        if o is None:
            if isinstance(other, (complex, float)):
                return complex(self) == other
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __abs__(self) -> float:
        return abs(complex(self))

    def __repr__(self):
        return f"QI({self.re}, {self.im})"

    def __str__(self):
        return format_scalar(self)


ZERO = QI(0)
ONE = QI(1)
I = QI(0, 1)


def is_exact(x) -> bool:
    return isinstance(x, QI)


def as_scalar(x, exact: bool | None = None):
    """Normalize ``x`` to ``QI`` (exact) or ``complex`` (approximate).

    Integers, fractions and ``QI`` stay exact unless ``exact=False``; floats and
    complex numbers become ``complex`` unless ``exact=True`` (then they are
    converted to their exact binary value).
    """
    if isinstance(x, QI):
        return complex(x) if exact is False else x
    if isinstance(x, (int, Fraction)) or isinstance(x, type(mpq())):
        return complex(float(x)) if exact is False else QI(x)
    if isinstance(x, numbers.Complex):
        z = complex(x)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise ScalarError(f"non-finite value {z!r}")
        if exact:
            return QI(z.real, z.imag)
        return z
    raise TypeError(f"not a scalar: {x!r}")


def to_complex(x) -> complex:
    return complex(x)


def _rational_sqrt(q: mpq):
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    if gmpy2.is_square(n) and gmpy2.is_square(d):
        return mpq(gmpy2.isqrt(n), gmpy2.isqrt(d))
    return None


def exact_sqrt(x: QI):
    """Square root in Q(i) if one exists, else ``None``.

    The returned root has positive real part, or zero real part and
    nonnegative imaginary part.
    """
    a, b = x.re, x.im
    if not b:
        r = _rational_sqrt(abs(a))
        if r is None:
            return None
        return QI(r, 0) if a >= 0 else QI(0, r)
    m = _rational_sqrt(a * a + b * b)
    if m is None:
        return None
    u = _rational_sqrt((a + m) / 2)
    if u is None or not u:
        return None
    v = b / (2 * u)
    return QI(u, v)


def exact_root(x: QI, k: int):
    """A ``k``-th root of ``x`` in Q(i), or ``None`` when none is found.

    Tries the principal floating root and its rotations by the Gaussian units,
    snapped to small rationals, and verifies exactly.
    """
    if k == 1:
        return x
    if k == 2:
        return exact_sqrt(x)
    z = complex(x)
    if z == 0:
        return ZERO
    base = cmath.exp(cmath.log(z) / k)
    for j in range(k):
        cand = base * cmath.exp(2j * math.pi * j / k)
        s = snap(cand, 10**6)
        if s is not None and s**k == x:
            return s
    return None


def snap(z: complex, max_den: int = 10**6, rtol: float = 1e-9):
    """Closest Gaussian rational with bounded denominators, if it is within ``rtol``."""
    z = complex(z)
    re = Fraction(z.real).limit_denominator(max_den)
    im = Fraction(z.imag).limit_denominator(max_den)
    cand = QI(re, im)
    if abs(complex(cand) - z) <= rtol * max(1.0, abs(z)):
        return cand
    return None


def _fmt_q(q: mpq) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_scalar(x) -> str:
    """Text form accepted by the polynomial parser."""
    if isinstance(x, QI):
        if not x.im:
            return _fmt_q(x.re)
        if not x.re:
            if x.im == 1:
                return "i"
            if x.im == -1:
                return "-i"
            return f"{_fmt_q(x.im)}*i"
        sign = "-" if x.im < 0 else "+"
        im = abs(x.im)
        im_s = "i" if im == 1 else f"{_fmt_q(im)}*i"
        return f"({_fmt_q(x.re)} {sign} {im_s})"
    z = complex(x)
    if z.imag == 0:
        return repr(z.real)
    sign = "-" if z.imag < 0 else "+"
    return f"({z.real!r} {sign} {abs(z.imag)!r}*i)"

"""Polynomials sharing preimages of compact sets: decomposition, normal forms, witnesses."""

from .poly import LinearMap, Polynomial, chebyshev, compose, iterate, monic_chebyshev, parse_poly
from .scalar import QI

__version__ = "0.1.0"

__all__ = [
    "QI",
    "Polynomial",
    "LinearMap",
    "chebyshev",
    "monic_chebyshev",
    "compose",
    "iterate",
    "parse_poly",
]

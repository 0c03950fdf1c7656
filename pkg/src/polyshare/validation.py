"""Named pass/fail checks with nonnegative residuals, shared by all reports."""

from __future__ import annotations

from dataclasses import dataclass

from .poly import LinearMap, Polynomial

__all__ = ["Validation", "poly_check", "map_check", "value_check"]


@dataclass(frozen=True)
class Validation:
    name: str
    passed: bool
    residual: float

    def to_json(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "residual": float(abs(self.residual))}


def poly_check(name: str, lhs: Polynomial, rhs: Polynomial, rtol: float = 1e-9) -> Validation:
    """Exact equality for exact operands, else a relative coefficient gap."""
    if lhs.exact and rhs.exact:
        ok = lhs == rhs
        return Validation(name, ok, 0.0 if ok else lhs.distance(rhs))
    gap = lhs.distance(rhs)
    scale = max(1.0, lhs.max_abs_coeff(), rhs.max_abs_coeff())
    return Validation(name, gap <= rtol * scale, gap)


def map_check(name: str, lhs: LinearMap, rhs: LinearMap, tol: float = 1e-9) -> Validation:
    return poly_check(name, lhs.as_poly(), rhs.as_poly(), tol)


def value_check(name: str, residual: float, tol: float) -> Validation:
    return Validation(name, residual <= tol, float(residual))

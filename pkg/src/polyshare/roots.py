"""Numeric roots with multiplicities."""

from __future__ import annotations

import numpy as np

from .poly import NEG_INF, Polynomial, PolyError

__all__ = ["roots", "RootError", "poly_gcd", "squarefree_decomposition", "DEFAULT_CLUSTER_RTOL"]

DEFAULT_CLUSTER_RTOL = 1e-9


class RootError(ArithmeticError):
    """Root iteration failed to converge."""


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic gcd over Q(i); exact inputs only."""
    if not (a.exact and b.exact):
        raise PolyError("poly_gcd needs exact inputs")
    while not b.is_zero():
        a, b = b, a % b
    return a.monic() if not a.is_zero() else a


def squarefree_decomposition(f: Polynomial) -> list:
    """Yun's algorithm: ``[(g_1, 1), (g_2, 2), ...]`` with ``f = lead * prod g_k^k``."""
    if f.degree == NEG_INF or f.degree < 1:
        return []
    out = []
    df = f.derivative()
    a = poly_gcd(f, df)
    b = f / a
    c = df / a
    d = c - b.derivative()
    k = 1
    while b.degree > 0:
        a = poly_gcd(b, d)
        b = b / a
        c = d / a if not d.is_zero() else d
        if a.degree > 0:
            out.append((a, k))
        d = c - b.derivative()
        k += 1
    return out


def _aberth(c: np.ndarray, z: np.ndarray, maxiter: int = 200) -> tuple[np.ndarray, bool]:
    """Polish all roots of the ascending coefficient vector ``c`` at once."""
    p = np.polynomial.polynomial
    dc = p.polyder(c)
    n = len(z)
    for _ in range(maxiter):
        pv = p.polyval(z, c)
        dv = p.polyval(z, dc)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = pv / dv
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            s = (1.0 / diff).sum(axis=1) - 1.0  # diagonal contributed 1
            step = w / (1.0 - w * s)
        step = np.where(np.isfinite(step), step, 0.0)
        z = z - step
        if np.all(np.abs(step) <= 4e-16 * np.maximum(1.0, np.abs(z))):
            return z, True
    return z, n <= 1


def _simple_roots(f: Polynomial) -> np.ndarray:
    c = f.numpy()
    n = len(c) - 1
    if n == 1:
        return np.array([-c[0] / c[1]])
    z0 = np.roots(c[::-1])
    z, _ = _aberth(c, z0.astype(complex))
    # keep whichever of eigenvalue / polished estimate has the smaller residual
    p = np.polynomial.polynomial
    better = np.abs(p.polyval(z, c)) <= np.abs(p.polyval(z0, c))
    return np.where(better, z, z0)


def _refine_cluster(f: Polynomial, center: complex, m: int) -> complex:
    """Newton on the (m-1)-th derivative, where a root of multiplicity m is simple."""
    g = f.derivative(m - 1).numpy()
    dg = np.polynomial.polynomial.polyder(g)
    z = complex(center)
    for _ in range(50):
        dv = np.polynomial.polynomial.polyval(z, dg)
        if dv == 0:
            break
        step = np.polynomial.polynomial.polyval(z, g) / dv
        z_new = z - step
        if abs(z_new - center) > 1e-3 * max(1.0, abs(center)):
            return complex(center)
        z = z_new
        if abs(step) <= 1e-16 * max(1.0, abs(z)):
            break
    return z


def _cluster(z: np.ndarray, rtol: float) -> list:
    """Group root estimates into multiplicity clusters; returns index lists.

    An m-fold root perturbed by rounding splits by about ``eps**(1/m)``, so the
    admissible spread depends on the size of the cluster being tested.
    """
    free = list(np.argsort(np.abs(z)))
    groups: list[list[int]] = []
    while free:
        i = free[0]
        scale = max(1.0, abs(z[i]))
        order = sorted(free, key=lambda k: abs(z[k] - z[i]))
        chosen = [i]
        for m in range(len(order), 1, -1):
            radius = max(rtol, 10.0 * 1e-15 ** (1.0 / m)) * scale
            cand = order[:m]
            center = z[cand].mean()
            if all(abs(z[k] - center) <= radius for k in cand):
                chosen = cand
                break
        groups.append(list(chosen))
        free = [k for k in free if k not in chosen]
    return groups


def roots(f: Polynomial, rtol: float = DEFAULT_CLUSTER_RTOL) -> list:
    """All complex roots of ``f`` as ``[(root, multiplicity), ...]``.

    Multiplicities add up to ``deg f``.  Exact inputs go through a square-free
    decomposition first, so repeated roots are found at full precision.
    """
    if f.degree == NEG_INF or f.degree < 1:
        raise PolyError("roots needs deg f >= 1")
    out: list = []
    if f.exact:
        for g, k in squarefree_decomposition(f):
            out.extend((complex(r), k) for r in _simple_roots(g))
    else:
        c = f.numpy()
        z0 = np.roots(c[::-1]).astype(complex)
        z, _ = _aberth(c, z0, maxiter=100)
        for g in _cluster(z, rtol):
            m = len(g)
            center = complex(z[g].mean())
            out.append((_refine_cluster(f, center, m) if m > 1 else center, m))
        # merge anything the refinement pulled together
        merged: list = []
        for r, m in out:
            for j, (s, k) in enumerate(merged):
                if abs(r - s) <= rtol * max(1.0, abs(s)):
                    merged[j] = ((s * k + r * m) / (k + m), k + m)
                    break
            else:
                merged.append((r, m))
        out = merged
    scale = 1.0 + f.max_abs_coeff()
    worst = max(abs(f(r)) for r, _ in out)
    if not np.isfinite(worst):
        raise RootError(f"root iteration diverged for degree {f.degree}")
    if worst > 1e-6 * scale * max(1.0, max(abs(r) for r, _ in out)) ** f.degree:
        raise RootError(f"root iteration did not converge (residual {worst:.3g})")
    return out

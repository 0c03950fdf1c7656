"""Compact plane sets: finite sets, concentric circles, segments, the confocal
ellipses E_t, sampled Julia sets and plain point clouds.

Parametric sets keep their closed form under the maps that preserve it (pure
powers on centered circles, Chebyshev forms on segments and ellipses, linear
maps on everything); otherwise they are sampled.
"""

from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union

import numpy as np
from scipy.spatial import cKDTree

from .decompose import power_structure
from .poly import NEG_INF, LinearMap, Polynomial, PolyError, chebyshev, compose
from .roots import roots
from .scalar import QI, I, is_exact, snap

__all__ = [
    "FinitePoints",
    "ConcentricCircles",
    "Segment",
    "Ellipse",
    "SampledJulia",
    "PointCloud",
    "SymmetryGroup",
    "JuliaParams",
    "INFINITE",
    "UNKNOWN",
    "preimage",
    "image",
    "set_equal",
    "hausdorff",
    "smallest_enclosing_circle",
    "symmetry_group",
    "closure_under_rotation",
    "ellipse_of",
    "julia_sample",
    "escape_radius",
    "in_filled_julia",
    "points_to_csv",
    "fiber_cloud",
    "linear_image",
    "set_to_json",
    "DEFAULT_SAMPLES",
]

INFINITE = "Infinite"
UNKNOWN = "Unknown"
DEFAULT_SAMPLES = 128
DEFAULT_POINT_TOL = 1e-8


def _as_points(pts) -> np.ndarray:
    arr = np.asarray(list(pts) if not isinstance(pts, np.ndarray) else pts, dtype=complex).ravel()
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError("non-finite point")
    return arr


def _cluster_points(pts: np.ndarray, tol: float) -> np.ndarray:
    """Merge points closer than ``2*tol`` (transitively), keeping cluster means."""
    if pts.size <= 1:
        return pts.copy()
    xy = np.column_stack([pts.real, pts.imag])
    tree = cKDTree(xy)
    pairs = tree.query_pairs(2 * tol, output_type="ndarray")
    parent = np.arange(len(pts))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots_ = np.array([find(i) for i in range(len(pts))])
    out = [pts[roots_ == r].mean() for r in np.unique(roots_)]
    return np.array(out, dtype=complex)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


# -- set types --------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FinitePoints:
    """Finite set; points closer than ``2*tol`` are merged on construction."""

    points: np.ndarray
    tol: float = DEFAULT_POINT_TOL

    def __post_init__(self):
        pts = _cluster_points(_as_points(self.points), self.tol)
        if pts.size == 0:
            raise ValueError("empty point set")
        object.__setattr__(self, "points", _frozen(pts))

    def __len__(self):
        return len(self.points)

    def sample(self, n: int = DEFAULT_SAMPLES) -> np.ndarray:
        return np.asarray(self.points)

    def to_json(self) -> dict:
        return {"type": "points", "tol": self.tol, "points": [[p.real, p.imag] for p in self.points]}


@dataclass(frozen=True)
class ConcentricCircles:
    center: complex
    radii: tuple

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        if not radii or any(r <= 0 or not math.isfinite(r) for r in radii):
            raise ValueError("radii must be positive and finite")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ValueError("radii must be strictly ascending")
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radii", radii)

    def sample(self, n: int = DEFAULT_SAMPLES) -> np.ndarray:
        s = np.exp(2j * np.pi * np.arange(n) / n)
        return np.concatenate([self.center + r * s for r in self.radii])

    def to_json(self) -> dict:
        return {"type": "circle", "center": [self.center.real, self.center.imag], "radii": list(self.radii)}


@dataclass(frozen=True)
class Segment:
    z1: complex
    z2: complex

    def __post_init__(self):
        object.__setattr__(self, "z1", complex(self.z1))
        object.__setattr__(self, "z2", complex(self.z2))
        if self.z1 == self.z2:
            raise ValueError("segment endpoints must differ")

    @property
    def midpoint(self) -> complex:
        return (self.z1 + self.z2) / 2

    def sample(self, n: int = DEFAULT_SAMPLES) -> np.ndarray:
        """Chebyshev-Lobatto nodes along the segment (endpoints included)."""
        if n == 1:
            return np.array([self.midpoint])
        x = np.cos(np.pi * np.arange(n) / (n - 1))[::-1]
        return self.midpoint + x * (self.z2 - self.z1) / 2

    def to_json(self) -> dict:
        return {"type": "segment", "endpoints": [[self.z1.real, self.z1.imag], [self.z2.real, self.z2.imag]]}


@dataclass(frozen=True)
class Ellipse:
    """The curve ``cos(t + s)``, ``s`` in ``[0, 2π]``: foci ``±1``."""

    t: complex

    def __post_init__(self):
        object.__setattr__(self, "t", complex(self.t))

    @property
    def modulus(self) -> float:
        return abs(cmath.exp(1j * self.t))

    @property
    def semi_major(self) -> float:
        rho = self.modulus
        return (rho + 1 / rho) / 2

    @property
    def semi_minor(self) -> float:
        rho = self.modulus
        return abs(rho - 1 / rho) / 2

    def is_degenerate(self, tol: float = 1e-12) -> bool:
        return self.semi_minor <= tol

    def sample(self, n: int = DEFAULT_SAMPLES) -> np.ndarray:
        s = 2 * np.pi * np.arange(n) / n
        return np.cos(self.t + s)

    def to_json(self) -> dict:
        return {"type": "ellipse", "t": [self.t.real, self.t.imag], "a": self.semi_major, "b": self.semi_minor}


JULIA_METHODS = ("modified", "inverse", "escape")


@dataclass(frozen=True)
class JuliaParams:
    """Sampler settings.

    ``modified``: backward tree pruned on a grid, so every cell near J gets
    about one point; ``inverse``: random backward walkers, which sample the
    harmonic measure and leave thin parts of J sparse; ``escape``: boundary
    cells of the escape-time grid.
    """

    method: str = "modified"
    samples: int = 10_000
    seed: int = 0
    walkers: int = 100
    burn_in: int = 30
    grid: int = 400
    max_iter: int = 256

    def __post_init__(self):
        if self.method not in JULIA_METHODS:
            raise ValueError(f"unknown Julia sampling method {self.method!r}")
        if self.samples < 1 or self.walkers < 1 or self.grid < 2 or self.max_iter < 1:
            raise ValueError("degenerate Julia sampling parameters")


@dataclass(frozen=True, eq=False)
class SampledJulia:
    generator: Polynomial
    samples: np.ndarray
    params: JuliaParams

    def sample(self, n: int = DEFAULT_SAMPLES) -> np.ndarray:
        return np.asarray(self.samples)

    def to_json(self) -> dict:
        return {
            "type": "julia",
            "generator": str(self.generator),
            "method": self.params.method,
            "points": [[p.real, p.imag] for p in self.samples],
        }


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Samples of a set with no closed form."""

    points: np.ndarray
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "points", _frozen(_as_points(self.points)))

    def sample(self, n: int = DEFAULT_SAMPLES) -> np.ndarray:
        return np.asarray(self.points)

    def to_json(self) -> dict:
        return {"type": "cloud", "source": self.source, "points": [[p.real, p.imag] for p in self.points]}


CompactSet = Union[FinitePoints, ConcentricCircles, Segment, Ellipse, SampledJulia, PointCloud]
PARAMETRIC = (ConcentricCircles, Segment, Ellipse)


def set_to_json(S) -> dict:
    return S.to_json()


def points_to_csv(points: Sequence[complex]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re", "im"])
    for p in points:
        w.writerow([repr(float(p.real)), repr(float(p.imag))])
    return buf.getvalue()


# -- linear maps act on every representation ----------------------------------------

def linear_image(m: LinearMap, S):
    a, b = complex(m.a), complex(m.b)
    if isinstance(S, FinitePoints):
        return FinitePoints(a * S.points + b, S.tol)
    if isinstance(S, ConcentricCircles):
        return ConcentricCircles(a * S.center + b, tuple(abs(a) * r for r in S.radii))
    if isinstance(S, Segment):
        return Segment(a * S.z1 + b, a * S.z2 + b)
    if isinstance(S, Ellipse):
        if abs(a - 1) < 1e-15 and b == 0:
            return S
        return PointCloud(a * S.sample(4 * DEFAULT_SAMPLES) + b, "linear image of ellipse")
    return PointCloud(a * S.sample() + b, "linear image")


def _linear_from_poly(f: Polynomial) -> LinearMap:
    return LinearMap(f.coeff(1), f.coeff(0))


# -- preimage / image ---------------------------------------------------------------

def fiber_cloud(f: Polynomial, w) -> tuple:
    """All roots of ``f(y) = w_k`` for every ``k`` (with multiplicity) and the index ``k`` of each.

    Batched companion eigenvalues plus one Newton step; meant for point clouds,
    where clustering of multiple roots is not needed.
    """
    w = np.asarray(w, dtype=complex).ravel()
    c = f.numpy()
    n = len(c) - 1
    if n == 1:
        return (w - c[0]) / c[1], np.arange(len(w))
    ys = _batched_fiber(c, w)
    dc = np.polynomial.polynomial.polyder(c)
    pv = np.polynomial.polynomial.polyval(ys, c) - w[:, None]
    dv = np.polynomial.polynomial.polyval(ys, dc)
    safe = np.abs(dv) > 1e-8 * (1 + np.abs(pv))
    step = np.where(safe, pv / np.where(safe, dv, 1), 0)
    return (ys - step).ravel(), np.repeat(np.arange(len(w)), n)


def _fiber(f: Polynomial, w) -> list:
    return [r for r, _ in roots(f - w)]


def _unit_segment_map(S: Segment) -> LinearMap:
    """Affine map taking ``[-1, 1]`` onto ``S`` (``-1 -> z1``)."""
    return LinearMap((S.z2 - S.z1) / 2, (S.z1 + S.z2) / 2)


def _chebyshev_pullback(f: Polynomial, S: Segment, rtol: float = 1e-10) -> Optional[LinearMap]:
    """``λ`` with ``f = σ∘T_n∘λ`` where ``σ`` maps ``[-1, 1]`` onto ``S``; ``None`` if no such form."""
    n = f.degree
    fa = f.to_approx()
    tn = chebyshev(n).to_approx()
    m = _unit_segment_map(S)
    for sigma in (m, m.compose(LinearMap(-1, 0))):
        g = sigma.inverse()(fa)
        c = -complex(g.coeff(n - 1)) / (n * complex(g.lead))
        base = (complex(g.lead) / 2 ** (n - 1)) ** (1.0 / n)
        for k in range(n):
            alpha = base * cmath.exp(2j * math.pi * k / n)
            lam = LinearMap(alpha, -alpha * c)
            if compose(tn, lam.as_poly()).close_to(g, rtol):
                return lam
    return None


def _chebyshev_pushforward(f: Polynomial, S: Segment, rtol: float = 1e-10) -> Optional[LinearMap]:
    """``σ`` with ``f = σ∘T_n∘λ`` where ``λ`` maps ``S`` onto ``[-1, 1]``; ``None`` if no such form."""
    n = f.degree
    h = compose(f.to_approx(), _unit_segment_map(S).as_poly())
    tn = chebyshev(n).to_approx()
    A = complex(h.lead) / 2 ** (n - 1)
    sigma = LinearMap(A, complex(h.coeff(0)) - A * complex(tn.coeff(0)))
    if sigma(tn).close_to(h, rtol):
        return sigma
    return None


def preimage(f: Polynomial, S, samples: int = DEFAULT_SAMPLES):
    """``f⁻¹(S)``; closed form where one applies, else a point cloud."""
    n = f.degree
    if n == NEG_INF or n < 1:
        raise PolyError("preimage needs deg f >= 1")
    if n == 1:
        return linear_image(_linear_from_poly(f).inverse(), S)
    if isinstance(S, FinitePoints):
        pts = [r for w in S.points for r in _fiber(f, complex(w))]
        return FinitePoints(np.array(pts), S.tol)
    if isinstance(S, ConcentricCircles):
        ps = power_structure(f)
        if ps is not None:
            sigma, lam, _ = ps
            inner = linear_image(sigma.inverse(), S)
            if abs(inner.center) <= 1e-12 * max(1.0, max(inner.radii)):
                radii = tuple(r ** (1.0 / n) for r in inner.radii)
                return ConcentricCircles(complex(lam.inverse()(0)), radii)
    if isinstance(S, Segment):
        lam = _chebyshev_pullback(f, S)
        if lam is not None:
            back = lam.inverse()
            return Segment(complex(back(-1)), complex(back(1)))
    pts, _ = fiber_cloud(f, S.sample(samples))
    return PointCloud(pts, f"preimage of {type(S).__name__}")


def image(f: Polynomial, S, samples: int = DEFAULT_SAMPLES):
    """``f(S)``; closed form where one applies, else a point cloud."""
    n = f.degree
    if n == NEG_INF:
        raise PolyError("image of the zero polynomial")
    if n == 0:
        return FinitePoints(np.array([complex(f.coeff(0))]))
    if n == 1:
        return linear_image(_linear_from_poly(f), S)
    if isinstance(S, FinitePoints):
        return FinitePoints(f(np.asarray(S.points)), S.tol)
    if isinstance(S, ConcentricCircles):
        ps = power_structure(f)
        if ps is not None:
            sigma, lam, _ = ps
            if abs(complex(lam(S.center))) <= 1e-12 * max(1.0, max(S.radii)):
                scale = abs(complex(lam.a))
                inner = ConcentricCircles(0, tuple((scale * r) ** n for r in S.radii))
                return linear_image(sigma, inner)
    if isinstance(S, Segment):
        sigma = _chebyshev_pushforward(f, S)
        if sigma is not None:
            return Segment(complex(sigma(-1)), complex(sigma(1)))
    if isinstance(S, Ellipse) and f.close_to(chebyshev(n), 1e-12):
        return Ellipse(n * S.t)
    return PointCloud(f(S.sample(samples)), f"image of {type(S).__name__}")


# -- comparison ------------------------------------------------------------------------

def hausdorff(A: np.ndarray, B: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two point clouds."""
    A = np.asarray(A, dtype=complex).ravel()
    B = np.asarray(B, dtype=complex).ravel()
    if A.size == 0 or B.size == 0:
        raise ValueError("hausdorff needs nonempty clouds")
    xa = np.column_stack([A.real, A.imag])
    xb = np.column_stack([B.real, B.imag])
    d_ab = cKDTree(xb).query(xa)[0].max()
    d_ba = cKDTree(xa).query(xb)[0].max()
    return float(max(d_ab, d_ba))


def _point_segment(p: complex, a: complex, b: complex) -> float:
    d = b - a
    t = ((p - a) * d.conjugate()).real / abs(d) ** 2
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * d))


def _parametric_hausdorff(S1, S2) -> Optional[float]:
    if isinstance(S1, Segment) and isinstance(S2, Segment):
        # distance to a convex set is convex, so the sup sits at an endpoint
        return max(
            _point_segment(S1.z1, S2.z1, S2.z2),
            _point_segment(S1.z2, S2.z1, S2.z2),
            _point_segment(S2.z1, S1.z1, S1.z2),
            _point_segment(S2.z2, S1.z1, S1.z2),
        )
    if isinstance(S1, ConcentricCircles) and isinstance(S2, ConcentricCircles):
        if abs(S1.center - S2.center) > 0:
            return None
        r1, r2 = np.array(S1.radii), np.array(S2.radii)
        return float(max(
            np.abs(r1[:, None] - r2[None, :]).min(axis=1).max(),
            np.abs(r2[:, None] - r1[None, :]).min(axis=1).max(),
        ))
    if isinstance(S1, Ellipse) and isinstance(S2, Ellipse) and S1.t == S2.t:
        return 0.0
    return None


def set_equal(S1, S2, tol: float = 1e-6, samples: int = 4096) -> tuple:
    """``(equal, hausdorff)``; parametric pairs are compared in closed form."""
    h = _parametric_hausdorff(S1, S2)
    if h is None:
        h = hausdorff(S1.sample(samples), S2.sample(samples))
    return h <= tol, h


# -- smallest enclosing circle ----------------------------------------------------------

def _circle_two(a: complex, b: complex):
    c = (a + b) / 2
    return c, abs(a - c)


def _circle_three(a: complex, b: complex, c: complex):
    ax, ay, bx, by, cx, cy = a.real, a.imag, b.real, b.imag, c.real, c.imag
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if abs(d) < 1e-300:
        return None
    ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / d
    uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / d
    center = complex(ux, uy)
    return center, max(abs(center - a), abs(center - b), abs(center - c))


def _inside(circle, p: complex, eps: float) -> bool:
    return abs(p - circle[0]) <= circle[1] + eps


def smallest_enclosing_circle(points, seed: int = 0) -> tuple:
    """``(center, radius)`` by Welzl's randomized incremental algorithm."""
    pts = points.points if isinstance(points, FinitePoints) else _as_points(points)
    if len(pts) == 0:
        raise ValueError("smallest_enclosing_circle needs a nonempty set")
    pts = list(pts)
    np.random.default_rng(seed).shuffle(pts)
    scale = max(1.0, max(abs(p) for p in pts))
    eps = 1e-14 * scale
    circle = (pts[0], 0.0)
    for i in range(1, len(pts)):
        p = pts[i]
        if _inside(circle, p, eps):
            continue
        circle = (p, 0.0)
        for j in range(i):
            q = pts[j]
            if _inside(circle, q, eps):
                continue
            circle = _circle_two(p, q)
            for k in range(j):
                r = pts[k]
                if _inside(circle, r, eps):
                    continue
                c3 = _circle_three(p, q, r)
                if c3 is not None:
                    circle = c3
    return complex(circle[0]), float(circle[1])


# -- symmetry ------------------------------------------------------------------------------

@dataclass(frozen=True)
class SymmetryGroup:
    center: object
    order: object
    generator: Optional[LinearMap]

    def to_json(self) -> dict:
        c = complex(self.center)
        return {
            "center": [c.real, c.imag],
            "order": self.order,
            "generator": None if self.generator is None else self.generator.to_json(),
        }


_EXACT_UNITS = {1: QI(1), 2: QI(-1), 4: I}


def _rotation(center, b: int) -> LinearMap:
    """Rotation by ``2π/b`` about ``center``; exact when both allow it."""
    if b in _EXACT_UNITS and is_exact(center):
        eps = _EXACT_UNITS[b]
        return LinearMap(eps, center - eps * center)
    eps = cmath.exp(2j * math.pi / b)
    c = complex(center)
    return LinearMap(eps, c - eps * c)


def _snap_center(c: complex, tol: float):
    s = snap(c, 10**6, rtol=tol)
    if s is None or abs(complex(s) - c) > tol:
        return c
    return s


def _maps_into(pts: np.ndarray, image_pts: np.ndarray, tol: float) -> bool:
    xy = np.column_stack([pts.real, pts.imag])
    d, _ = cKDTree(xy).query(np.column_stack([image_pts.real, image_pts.imag]))
    return bool(d.max() <= tol)


def symmetry_group(S) -> SymmetryGroup:
    """Rotational symmetry group about the smallest-enclosing-circle center."""
    if isinstance(S, ConcentricCircles):
        return SymmetryGroup(S.center, INFINITE, None)
    if isinstance(S, Segment):
        m = S.midpoint
        return SymmetryGroup(m, 2, LinearMap(-1, 2 * m))
    if isinstance(S, Ellipse):
        return SymmetryGroup(0, 2, LinearMap(-1, 0))
    if not isinstance(S, FinitePoints):
        return SymmetryGroup(complex(np.mean(S.sample())), UNKNOWN, None)
    pts = np.asarray(S.points)
    tol = max(S.tol, 1e-12) * 10
    if len(pts) == 1:
        return SymmetryGroup(_snap_center(complex(pts[0]), tol), INFINITE, None)
    c, radius = smallest_enclosing_circle(pts)
    center = _snap_center(c, tol)
    c = complex(center)
    rel = pts - c
    far = rel[np.abs(np.abs(rel) - radius) <= tol]
    p0 = far[0]
    verified = 0
    for q in far:
        eps = q / p0
        eps = eps / abs(eps)
        if _maps_into(pts, c + eps * rel, tol):
            verified += 1
    b = max(verified, 1)
    return SymmetryGroup(center, b, _rotation(center, b))


def closure_under_rotation(S: FinitePoints, b: int, center=0) -> bool:
    """True iff rotating ``S`` by ``2π/b`` about ``center`` maps it into itself within ``S.tol``."""
    if b < 1:
        raise ValueError("rotation order must be positive")
    pts = np.asarray(S.points)
    c = complex(center)
    eps = cmath.exp(2j * math.pi / b)
    return _maps_into(pts, c + eps * (pts - c), max(S.tol, 1e-12) * 10)


def ellipse_of(t) -> Ellipse:
    return Ellipse(t)


# -- Julia sets ----------------------------------------------------------------------------

def escape_radius(f: Polynomial) -> float:
    c = f.numpy()
    lead = abs(c[-1])
    return max(2.0, 1.0 + float(np.abs(c[:-1]).sum()) / lead)


def in_filled_julia(f: Polynomial, z, max_iter: int = 256) -> np.ndarray:
    """Bounded-orbit test for the filled Julia set (vectorized)."""
    R = escape_radius(f)
    z = np.array(z, dtype=complex, copy=True)
    alive = np.ones(z.shape, dtype=bool)
    c = f.numpy()
    for _ in range(max_iter):
        zz = z[alive]
        acc = np.zeros_like(zz)
        for coef in c[::-1]:
            acc = acc * zz + coef
        z[alive] = acc
        alive &= np.abs(z) <= R
        if not alive.any():
            break
    return alive


def _batched_fiber(c: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Roots of ``f(y) = w_k`` for every ``k``; shape ``(len(w), deg f)``."""
    n = len(c) - 1
    monic = c / c[-1]
    comp = np.zeros((len(w), n, n), dtype=complex)
    if n > 1:
        comp[:, 1:, :-1] = np.eye(n - 1)
    comp[:, :, -1] = -monic[:-1]
    comp[:, 0, -1] = -(c[0] - w) / c[-1]
    return np.linalg.eigvals(comp)


def _inverse_iteration(f: Polynomial, params: JuliaParams) -> np.ndarray:
    rng = np.random.default_rng(params.seed)
    c = f.numpy()
    n = len(c) - 1
    walkers = min(params.walkers, params.samples)
    steps = -(-params.samples // walkers)
    z = rng.uniform(-1, 1, walkers) + 1j * rng.uniform(-1, 1, walkers)
    out = []
    for step in range(params.burn_in + steps):
        fib = _batched_fiber(c, z)
        pick = rng.integers(0, n, walkers)
        z = fib[np.arange(walkers), pick]
        if step >= params.burn_in:
            out.append(z.copy())
    return np.concatenate(out)[: params.samples]


def _pruned_tree(f: Polynomial, params: JuliaParams) -> np.ndarray:
    """Backward tree from points near J, expanding a point only if its grid cell is new.

    The grid is refined until the tree yields at least ``samples`` points, which
    are then thinned uniformly at random.
    """
    c = f.numpy()
    R = escape_radius(f)
    seeds = _inverse_iteration(f, replace(params, samples=params.walkers))
    pts = seeds
    cells = 256
    while True:
        pts = _tree_at(c, seeds, R, cells, 4 * params.samples)
        if pts.size >= params.samples or cells >= 1 << 15:
            break
        cells *= 2
    if pts.size > params.samples:
        idx = np.random.default_rng(params.seed).choice(pts.size, params.samples, replace=False)
        pts = pts[np.sort(idx)]
    return pts


def _tree_at(c: np.ndarray, seeds: np.ndarray, R: float, cells: int, cap: int) -> np.ndarray:
    h = 2 * R / cells
    seen: set = set()

    def fresh(z: np.ndarray) -> np.ndarray:
        ix = np.floor((z.real + R) / h).astype(np.int64)
        iy = np.floor((z.imag + R) / h).astype(np.int64)
        keep = np.zeros(z.size, dtype=bool)
        for k, key in enumerate(zip(ix.tolist(), iy.tolist())):
            if key not in seen:
                seen.add(key)
                keep[k] = True
        return z[keep]

    frontier = fresh(seeds)
    out = [frontier]
    total = frontier.size
    while frontier.size and total < cap:
        frontier = fresh(_batched_fiber(c, frontier).ravel())
        out.append(frontier)
        total += frontier.size
    return np.concatenate(out)


def _escape_boundary(f: Polynomial, params: JuliaParams) -> np.ndarray:
    R = escape_radius(f)
    xs = np.linspace(-R, R, params.grid)
    X, Y = np.meshgrid(xs, xs)
    Zg = X + 1j * Y
    inside = in_filled_julia(f, Zg, params.max_iter)
    edge = np.zeros_like(inside)
    edge[1:-1, 1:-1] = inside[1:-1, 1:-1] & ~(
        inside[:-2, 1:-1] & inside[2:, 1:-1] & inside[1:-1, :-2] & inside[1:-1, 2:]
    )
    pts = Zg[edge]
    if pts.size == 0:
        raise ValueError("escape-time grid found no boundary cells; refine the grid")
    if pts.size > params.samples:
        idx = np.random.default_rng(params.seed).choice(pts.size, params.samples, replace=False)
        pts = pts[np.sort(idx)]
    return pts


def julia_sample(f: Polynomial, params: Optional[JuliaParams] = None) -> SampledJulia:
    """Point cloud approximating the Julia set of ``f``."""
    if f.degree == NEG_INF or f.degree < 2:
        raise PolyError("julia_sample needs deg f >= 2")
    params = params or JuliaParams()
    if params.method == "modified":
        pts = _pruned_tree(f, params)
    elif params.method == "inverse":
        pts = _inverse_iteration(f, params)
    else:
        pts = _escape_boundary(f, params)
    return SampledJulia(f, _frozen(pts), params)

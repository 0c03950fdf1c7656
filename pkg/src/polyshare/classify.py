"""Witnesses for polynomials sharing preimages of compact sets.

``classify_shared_preimage`` decides the composition equation
``g1∘f1 = g2∘f2`` with ``deg g1 = d2/d`` and ``deg g2 = d1/d`` by exact linear
algebra and recognizes the power and Chebyshev normal forms of the reduced
pair.  The set-level routines (``construct_K3``, ``classify_same_target``,
``classify_invariant``, ``build_chain``) add the geometric checks, which hold
only up to a tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares
from scipy.spatial import cKDTree

from .decompose import (
    chebyshev_structure,
    divisors,
    gcrc,
    padic_expand,
    power_structure,
    right_factor,
)
from .poly import NEG_INF, LinearMap, Polynomial, PolyError, Z, chebyshev, compose, iterate, normalize
from .scalar import QI, ZERO, exact_root, is_exact, snap
from .sets import (
    ConcentricCircles,
    FinitePoints,
    JuliaParams,
    PointCloud,
    SampledJulia,
    Segment,
    hausdorff,
    image,
    julia_sample,
    linear_image,
    preimage,
    set_equal,
    smallest_enclosing_circle,
)
from .validation import Validation, poly_check, value_check

__all__ = [
    "COMPOSITE",
    "POWER_FORM",
    "CHEBYSHEV_FORM",
    "SharedPreimageWitness",
    "NoSolution",
    "TargetReport",
    "InvariantSetReport",
    "ChainEntry",
    "ChainReport",
    "Theorem4Report",
    "ClassifyError",
    "SetValidationError",
    "HypothesisError",
    "classify_shared_preimage",
    "construct_K3",
    "cardinality_gate",
    "classify_same_target",
    "classify_invariant",
    "minimal_invariant_generator",
    "find_mu",
    "commuting_shadow",
    "julia_equal",
    "theorem4_suite",
    "build_chain",
    "DEGREE_CAP",
    "JULIA_THRESHOLD",
]

COMPOSITE = "Composite"
POWER_FORM = "PowerForm"
CHEBYSHEV_FORM = "ChebyshevForm"

DEGREE_CAP = 10_000
JULIA_THRESHOLD = 0.05
SET_TOL = 1e-6
APPROX_RTOL = 1e-9


class ClassifyError(ValueError):
    pass


class SetValidationError(ClassifyError):
    def __init__(self, message: str, validations: Sequence[Validation]):
        super().__init__(message)
        self.validations = list(validations)


class HypothesisError(ClassifyError):
    pass


def _identity(exact: bool) -> LinearMap:
    return LinearMap.identity() if exact else LinearMap(1.0, 0.0)


def _set_tol(S) -> float:
    return JULIA_THRESHOLD if isinstance(S, (SampledJulia, PointCloud)) else SET_TOL


def _degree_guard(*degrees: int) -> None:
    for n in degrees:
        if n > DEGREE_CAP:
            raise ClassifyError(f"degree {n} exceeds the cap of {DEGREE_CAP}")


# -- witness types -------------------------------------------------------------------

@dataclass(frozen=True)
class NoSolution:
    reason: str
    residual: float = 0.0

    case = "NoSolution"

    def to_json(self) -> dict:
        return {"case": self.case, "reason": self.reason, "residual": self.residual}


@dataclass(frozen=True, eq=False)
class SharedPreimageWitness:
    """Solution of ``g1∘f1 = g2∘f2`` in one of the three normal forms.

    ``f1`` and ``f2`` are stored in working order (``deg f1 <= deg f2``);
    ``swapped`` records whether the caller's order was reversed.
    """

    case: str
    d: int
    W: Polynomial
    f1_tilde: Polynomial
    f2_tilde: Polynomial
    g1: Polynomial
    g2: Polynomial
    sigma1: LinearMap
    sigma2: LinearMap
    f1: Polynomial
    f2: Polynomial
    R: Optional[Polynomial] = None
    c: Optional[int] = None
    K3: object = None
    swapped: bool = False
    validations: tuple = ()

    @property
    def exact(self) -> bool:
        return all(p.exact for p in (self.W, self.f1_tilde, self.f2_tilde, self.g1, self.g2))

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.validations)

    def to_json(self) -> dict:
        out = {
            "case": self.case,
            "d": self.d,
            "swapped": self.swapped,
            "exact": self.exact,
            "W": self.W.to_json(),
            "f1_tilde": self.f1_tilde.to_json(),
            "f2_tilde": self.f2_tilde.to_json(),
            "g1": self.g1.to_json(),
            "g2": self.g2.to_json(),
            "sigma1": self.sigma1.to_json(),
            "sigma2": self.sigma2.to_json(),
            "text": {
                "W": str(self.W),
                "f1_tilde": str(self.f1_tilde),
                "f2_tilde": str(self.f2_tilde),
                "g1": str(self.g1),
                "g2": str(self.g2),
                "sigma1": str(self.sigma1),
                "sigma2": str(self.sigma2),
            },
        }
        if self.R is not None:
            out["R"] = self.R.to_json()
            out["text"]["R"] = str(self.R)
            out["c"] = self.c
        if self.K3 is not None:
            out["K3"] = self.K3.to_json()
        return out


# -- composition equation ----------------------------------------------------------------

def _solve_exact(rows: list, rhs: list):
    """Gaussian elimination over Q(i); ``None`` when inconsistent."""
    m = len(rows)
    n = len(rows[0]) if rows else 0
    A = [list(r) + [b] for r, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, m) if A[i][col]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = A[r][col].inverse()
        A[r] = [x * inv for x in A[r]]
        for i in range(m):
            if i != r and A[i][col]:
                fct = A[i][col]
                A[i] = [x - fct * y for x, y in zip(A[i], A[r])]
        pivots.append(col)
        r += 1
        if r == m:
            break
    if any(A[i][n] for i in range(r, m)):
        return None
    x = [ZERO] * n
    for i, col in enumerate(pivots):
        x[col] = A[i][n]
    return x


def _left_factors(f1: Polynomial, f2: Polynomial, e1: int, e2: int):
    """``(ĝ1, ĝ2, residual)`` with ``ĝ1∘f1 = ĝ2∘f2``, ``ĝ1`` monic of degree ``e2`` with
    ``ĝ1(0) = 0`` and ``deg ĝ2 = e1``; ``None`` in place of the pair when no solution exists."""
    exact = f1.exact and f2.exact
    if not exact:
        f1, f2 = f1.to_approx(), f2.to_approx()
    N = f1.degree * e2 + 1
    pw1 = [f1 ** k for k in range(e2 + 1)]
    pw2 = [f2 ** j for j in range(e1 + 1)]
    cols = [pw1[k] for k in range(1, e2)] + [-pw2[j] for j in range(e1 + 1)]
    target = -pw1[e2]
    if exact:
        rows = [[c.coeff(i) for c in cols] for i in range(N)]
        rhs = [target.coeff(i) for i in range(N)]
        sol = _solve_exact(rows, rhs)
        if sol is None:
            return None, None, float("inf")
        residual = 0.0
    else:
        M = np.array([[complex(c.coeff(i)) for c in cols] for i in range(N)])
        b = np.array([complex(target.coeff(i)) for i in range(N)])
        sol, *_ = np.linalg.lstsq(M, b, rcond=None)
        scale = max(1.0, float(np.abs(b).max()))
        residual = float(np.abs(M @ sol - b).max()) / scale
        if residual > 1e-8:
            return None, None, residual
        sol = list(sol)
    zero = ZERO if exact else 0j
    one = QI(1) if exact else 1 + 0j
    g1 = Polynomial._raw([zero] + sol[: e2 - 1] + [one], exact)
    g2 = Polynomial._raw(sol[e2 - 1 :], exact)
    return g1, g2, residual


def _power_tail(B: Polynomial, e1: int):
    """``(β, R, c)`` with ``B = z^c R(z^e1) + β``, or ``None``."""
    n = B.degree
    c = n % e1
    zero = ZERO if B.exact else 0j
    scale = max(1.0, B.max_abs_coeff())
    coeffs = [zero] * ((n - c) // e1 + 1)
    for k in range(1, n + 1):
        a = B.coeff(k)
        if not a:
            continue
        if k % e1 != c:
            if B.exact or abs(a) > APPROX_RTOL * scale:
                return None
            continue
        coeffs[(k - c) // e1] = a
    return B.coeff(0), Polynomial._raw(coeffs, B.exact), c


def _power_witness(A, B, W, e1, e2):
    ps = power_structure(A)
    if ps is None:
        return None
    sigma1, lam, _ = ps
    lam_inv = lam.inverse()
    B2 = compose(B, lam_inv.as_poly())
    tail = _power_tail(B2, e1)
    if tail is None:
        return None
    beta, R, c = tail
    exact = A.exact and B.exact
    sigma2 = LinearMap(1, beta) if exact else LinearMap(1.0, complex(beta))
    W2 = lam(W)
    f1t = compose(A, lam_inv.as_poly())
    f2t = B2
    zpow = Polynomial.monomial(e1, 1, exact=exact)
    g1 = compose(Polynomial.monomial(c, 1, exact=exact) * R ** e1, sigma1.inverse().as_poly())
    g2 = compose(zpow, sigma2.inverse().as_poly())
    return dict(case=POWER_FORM, W=W2, f1_tilde=f1t, f2_tilde=f2t, g1=g1, g2=g2,
                sigma1=sigma1, sigma2=sigma2, R=R, c=c)


def _chebyshev_witness(A, B, W, e1, e2, exact_only: bool):
    cs = chebyshev_structure(B)
    if cs is None:
        return None
    sigma2, lam, _ = cs
    if exact_only and not (sigma2.exact and lam.exact):
        return None
    lam_inv = lam.inverse()
    A2 = compose(A, lam_inv.as_poly())
    te1 = chebyshev(e1)
    exact = A2.exact and lam.exact
    if not exact:
        A2, te1 = A2.to_approx(), te1.to_approx()
    a = A2.lead / te1.lead
    sigma1 = LinearMap(a, A2.coeff(0) - a * te1.coeff(0))
    if not sigma1(te1).close_to(A2, APPROX_RTOL):
        return None
    W2 = lam(W)
    g1 = compose(chebyshev(e2), sigma1.inverse().as_poly())
    g2 = compose(chebyshev(e1), sigma2.inverse().as_poly())
    return dict(case=CHEBYSHEV_FORM, W=W2, f1_tilde=A2, f2_tilde=compose(B, lam_inv.as_poly()),
                g1=g1, g2=g2, sigma1=sigma1, sigma2=sigma2, R=None, c=None)


def _witness_validations(w: dict, f1: Polynomial, f2: Polynomial, e1: int, e2: int) -> list:
    rt = APPROX_RTOL * 10
    out = [
        poly_check("g1∘f1 = g2∘f2", compose(w["g1"], f1), compose(w["g2"], f2), rt),
        poly_check("f1 = f1_tilde∘W", compose(w["f1_tilde"], w["W"]), f1, rt),
        poly_check("f2 = f2_tilde∘W", compose(w["f2_tilde"], w["W"]), f2, rt),
        Validation("deg g1 = d2/d", w["g1"].degree == e2, 0.0),
        Validation("deg g2 = d1/d", w["g2"].degree == e1, 0.0),
    ]
    exact = f1.exact and f2.exact
    if w["case"] == POWER_FORM:
        R, c = w["R"], w["c"]
        zc = Polynomial.monomial(c, 1, exact=exact)
        ze1 = Polynomial.monomial(e1, 1, exact=exact)
        out += [
            poly_check("f1_tilde = σ1∘z^(d1/d)", w["f1_tilde"], w["sigma1"](ze1), rt),
            poly_check("f2_tilde = σ2∘z^c R(z^(d1/d))", w["f2_tilde"], w["sigma2"](zc * compose(R, ze1)), rt),
            Validation("c = d2/d mod d1/d", c == e2 % e1, 0.0),
            Validation("gcd(c, d1/d) = 1", math.gcd(c, e1) == 1, 0.0),
        ]
    elif w["case"] == CHEBYSHEV_FORM:
        out += [
            poly_check("f1_tilde = σ1∘T_(d1/d)", w["f1_tilde"], w["sigma1"](chebyshev(e1)), rt),
            poly_check("f2_tilde = σ2∘T_(d2/d)", w["f2_tilde"], w["sigma2"](chebyshev(e2)), rt),
        ]
    return out


def classify_shared_preimage(f1: Polynomial, f2: Polynomial):
    """Witness for ``g1∘f1 = g2∘f2`` with minimal-degree left factors, or :class:`NoSolution`."""
    for f in (f1, f2):
        if f.degree == NEG_INF or f.degree < 1:
            raise PolyError("classify_shared_preimage needs nonconstant inputs")
    swapped = f1.degree > f2.degree
    if swapped:
        f1, f2 = f2, f1
    if not (f1.exact and f2.exact):
        f1, f2 = f1.to_approx(), f2.to_approx()
    d1, d2 = f1.degree, f2.degree
    _degree_guard(d1 * d2)
    exact = f1.exact

    if d2 % d1 == 0:
        exp = padic_expand(f2, f1)
        scale = max(1.0, f2.max_abs_coeff())
        bad = [a for a in exp.digits if a.degree != NEG_INF and a.degree > 0]
        if exact and bad:
            return NoSolution("f2 is not a polynomial in f1", max(a.max_abs_coeff() for a in bad))
        if not exact and any(max(abs(x) for x in a.coeffs[1:]) > APPROX_RTOL * scale for a in bad):
            return NoSolution("f2 is not a polynomial in f1", max(a.max_abs_coeff() for a in bad))
        g1 = Polynomial._raw([a.coeff(0) for a in exp.digits], exact)
        Wn, _, post = normalize(f1)
        ident = _identity(exact)
        vals = [
            poly_check("f2 = g1∘f1", compose(g1, f1), f2, APPROX_RTOL * 10),
            poly_check("f1 = f1_tilde∘W", post(Wn), f1, APPROX_RTOL * 10),
        ]
        return SharedPreimageWitness(
            COMPOSITE, d1, Wn, post.as_poly(), compose(g1, post.as_poly()), g1, Z if exact else Z.to_approx(),
            ident, ident, f1, f2, swapped=swapped, validations=tuple(vals),
        )

    d = math.gcd(d1, d2)
    e1, e2 = d1 // d, d2 // d
    g1h, g2h, residual = _left_factors(f1, f2, e1, e2)
    if g1h is None:
        return NoSolution("no g1, g2 of degrees d2/d, d1/d solve g1∘f1 = g2∘f2", residual)
    W, A, B = gcrc(f1, f2)
    if W.degree != d:
        return NoSolution(f"common right component has degree {W.degree}, expected {d}", residual)
    found = (
        # exact inputs: an irrational Chebyshev form ranks below an exact power form
        _chebyshev_witness(A, B, W, e1, e2, exact_only=exact)
        or _power_witness(A, B, W, e1, e2)
        or _chebyshev_witness(A, B, W, e1, e2, exact_only=False)
    )
    if found is None:
        raise ClassifyError(
            f"composition equation is solvable but neither normal form fits "
            f"(ĝ1 = {g1h}, ĝ2 = {g2h}); this contradicts the classification"
        )
    vals = _witness_validations(found, f1, f2, e1, e2)
    vals.append(poly_check("ĝ1∘f1 = ĝ2∘f2 (linear solve)", compose(g1h, f1), compose(g2h, f2), 1e-8))
    return SharedPreimageWitness(d=d, f1=f1, f2=f2, swapped=swapped, validations=tuple(vals), **found)


# -- sets attached to a witness -----------------------------------------------------------

def cardinality_gate(w: SharedPreimageWitness, K=None, K1=None, K2=None) -> bool:
    """True if ``card K >= lcm(d1, d2)`` or ``card K1 >= d2/d + 1`` or ``card K2 >= d1/d + 1``.

    Infinite (parametric or sampled) sets always pass.
    """
    d1, d2 = w.f1.degree, w.f2.degree
    e1, e2 = d1 // w.d, d2 // w.d

    def card(S):
        if S is None:
            return 0
        return len(S.points) if isinstance(S, FinitePoints) else math.inf

    return card(K) >= math.lcm(d1, d2) or card(K1) >= e2 + 1 or card(K2) >= e1 + 1


def construct_K3(w: SharedPreimageWitness, K1, K2, tol: float = SET_TOL) -> SharedPreimageWitness:
    """``K3 = g1(K1)``, checked against the three set identities; returns the witness with ``K3`` set."""
    if w.case == COMPOSITE:
        raise ClassifyError("construct_K3 needs a PowerForm or ChebyshevForm witness")
    if w.swapped:
        K1, K2 = K2, K1
    pre = []
    ok, h = set_equal(preimage(w.f1, K1), preimage(w.f2, K2), tol)
    pre.append(Validation("f1⁻¹(K1) = f2⁻¹(K2)", ok, h))
    if not ok:
        raise SetValidationError(f"hypothesis fails: fibers differ by {h:.3g}", pre)
    K3 = image(w.g1, K1)
    checks = [
        ("g2(K2) = K3", image(w.g2, K2), K3),
        ("g1⁻¹(K3) = K1", preimage(w.g1, K3), K1),
        ("g2⁻¹(K3) = K2", preimage(w.g2, K3), K2),
    ]
    vals = list(pre)
    for name, S, T in checks:
        ok, h = set_equal(S, T, tol)
        vals.append(Validation(name, ok, h))
    broken = [v for v in vals if not v.passed]
    if broken:
        desc = ", ".join(f"{v.name} (gap {v.residual:.3g})" for v in broken)
        raise SetValidationError(f"K3 validation failed: {desc}", vals)
    return replace(w, K3=K3, validations=tuple(w.validations) + tuple(vals))


# -- same target ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TargetReport:
    case: str
    witness: object
    sigma: Optional[LinearMap] = None
    gamma: object = None
    signs: Optional[tuple] = None
    g1: Optional[Polynomial] = None
    validations: tuple = ()
    note: str = ""

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.validations)

    def to_json(self) -> dict:
        out = {"case": self.case, "note": self.note}
        if self.sigma is not None:
            out["sigma"] = self.sigma.to_json()
            out["sigma_text"] = str(self.sigma)
        if self.gamma is not None:
            g = complex(self.gamma)
            out["gamma"] = [g.real, g.imag]
        if self.signs is not None:
            out["signs"] = list(self.signs)
        if self.g1 is not None:
            out["g1"] = self.g1.to_json()
            out["g1_text"] = str(self.g1)
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


def _fibers_agree(f1, f2, T1, T2, tol, name):
    ok, h = set_equal(preimage(f1, T1, samples=1024), preimage(f2, T2, samples=1024), tol)
    return Validation(name, ok, h)


def classify_same_target(f1: Polynomial, f2: Polynomial, T, tol: Optional[float] = None) -> TargetReport:
    """Shape of a pair with ``f1⁻¹(T) = f2⁻¹(T)``: composite, concentric circles or segment."""
    tol = _set_tol(T) if tol is None else tol
    hyp = _fibers_agree(f1, f2, T, T, tol, "f1⁻¹(T) = f2⁻¹(T)")
    if not hyp.passed:
        raise HypothesisError(f"fibers differ (Hausdorff {hyp.residual:.3g})")
    w = classify_shared_preimage(f1, f2)
    if isinstance(w, NoSolution):
        raise ClassifyError(f"no shared-preimage witness: {w.reason}")
    if isinstance(T, FinitePoints):
        return TargetReport("OutOfTheorem", w, validations=(hyp,) + tuple(w.validations),
                            note="finite target; only the shared-preimage witness applies")
    if w.case == COMPOSITE:
        ok, h = set_equal(preimage(w.g1, T, samples=1024), T, tol)
        vals = (hyp,) + tuple(w.validations) + (Validation("g1⁻¹(T) = T", ok, h),)
        return TargetReport(COMPOSITE, w, g1=w.g1, validations=vals)
    e1, e2 = w.f1.degree // w.d, w.f2.degree // w.d
    sig = w.sigma1
    inv = sig.inverse()
    u1 = inv(w.f1_tilde)
    u2 = inv(w.f2_tilde)
    vals = [hyp] + list(w.validations)
    if isinstance(T, ConcentricCircles) or w.case == POWER_FORM:
        gamma = u2.lead
        target = Polynomial.monomial(e2, gamma, exact=u2.exact)
        vals.append(poly_check("σ⁻¹∘f1_tilde = z^(d1/d)", u1, Polynomial.monomial(e1, 1, exact=u1.exact)))
        vals.append(poly_check("σ⁻¹∘f2_tilde = γ z^(d2/d)", u2, target))
        return TargetReport("Circles", w, sigma=sig, gamma=gamma, validations=tuple(vals))
    t1, t2 = chebyshev(e1), chebyshev(e2)
    s2 = 1 if u2.close_to(t2 if u2.exact else t2.to_approx(), APPROX_RTOL) else -1
    vals.append(poly_check("σ⁻¹∘f1_tilde = T_(d1/d)", u1, t1 if u1.exact else t1.to_approx()))
    vals.append(poly_check("σ⁻¹∘f2_tilde = ±T_(d2/d)", u2, s2 * (t2 if u2.exact else t2.to_approx())))
    return TargetReport("Segment", w, sigma=sig, signs=(1, s2), validations=tuple(vals))


# -- invariant sets ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class InvariantSetReport:
    case: str
    sigma: Optional[LinearMap] = None
    gamma: object = None
    signs: Optional[tuple] = None
    p: Optional[Polynomial] = None
    s1: Optional[int] = None
    s2: Optional[int] = None
    mu1: Optional[LinearMap] = None
    mu2: Optional[LinearMap] = None
    validations: tuple = ()

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.validations)

    def to_json(self) -> dict:
        out = {"case": self.case}
        for name in ("sigma", "mu1", "mu2"):
            m = getattr(self, name)
            if m is not None:
                out[name] = m.to_json()
                out[name + "_text"] = str(m)
        if self.gamma is not None:
            g = complex(self.gamma)
            out["gamma"] = [g.real, g.imag]
        if self.signs is not None:
            out["signs"] = list(self.signs)
        if self.p is not None:
            out["p"] = self.p.to_json()
            out["p_text"] = str(self.p)
            out["s1"], out["s2"] = self.s1, self.s2
        return out


def _directed(A: np.ndarray, B: np.ndarray) -> float:
    """``max_a min_b |a - b|``."""
    xa = np.column_stack([A.real, A.imag])
    xb = np.column_stack([B.real, B.imag])
    return float(cKDTree(xb).query(xa)[0].max())


def _invariant(f: Polynomial, T, tol: float) -> Validation:
    name = f"f⁻¹(T) = T for f = {f}"
    if isinstance(T, (SampledJulia, PointCloud)):
        # Inverse-iteration clouds undersample the thin parts of J, where the
        # pulled-back cloud is dense; compare f(T) with T and require only
        # that T lies near f⁻¹(T).
        pts = np.asarray(T.sample())
        back = np.asarray(preimage(f, T).sample())
        h = max(hausdorff(f(pts), pts), _directed(pts, back))
        return Validation(name, h <= tol, h)
    ok, h = set_equal(preimage(f, T, samples=1024), T, tol)
    return Validation(name, ok, h)


def classify_invariant(f1: Polynomial, f2: Polynomial, T, tol: Optional[float] = None,
                       params: Optional[JuliaParams] = None) -> InvariantSetReport:
    """Shape of a pair with ``f1⁻¹(T) = f2⁻¹(T) = T``."""
    tol = _set_tol(T) if tol is None else tol
    hyp = [_invariant(f1, T, tol), _invariant(f2, T, tol)]
    if not all(v.passed for v in hyp):
        raise HypothesisError("T is not invariant: " + ", ".join(f"{v.name} (gap {v.residual:.3g})" for v in hyp if not v.passed))
    single = isinstance(T, FinitePoints) and len(T.points) == 1
    if single or isinstance(T, ConcentricCircles):
        center = complex(T.points[0]) if single else T.center
        return _circles_report(f1, f2, center, point=single, hyp=hyp)
    if isinstance(T, Segment):
        return _segment_report(f1, f2, T, hyp)
    p, s1, s2, mu1, mu2, vals = minimal_invariant_generator(f1, f2, T, tol=tol, _with_maps=True)
    return InvariantSetReport("IterateFamily", p=p, s1=s1, s2=s2, mu1=mu1, mu2=mu2, validations=tuple(hyp + vals))


def _snap_scalar(x):
    s = snap(complex(x), 10**6, 1e-12)
    return s if s is not None else complex(x)


def _circles_report(f1, f2, center, point: bool, hyp) -> InvariantSetReport:
    d1, d2 = f1.degree, f2.degree
    exact = f1.exact and f2.exact
    c = _snap_scalar(center) if exact else complex(center)
    a1 = f1.lead
    alpha = None
    if exact and is_exact(c):
        alpha = exact_root(QI(1) / a1, d1 - 1) if d1 > 1 else QI(1)
    if alpha is None:
        alpha = (1 / complex(a1)) ** (1.0 / (d1 - 1)) if d1 > 1 else 1 + 0j
        c = complex(c)
    sigma = LinearMap(alpha, c)
    inv = sigma.inverse()
    u1 = inv(compose(f1, sigma.as_poly()))
    u2 = inv(compose(f2, sigma.as_poly()))
    if not (u1.exact and u2.exact):
        u1, u2 = u1.to_approx(), u2.to_approx()
    gamma = u2.lead
    vals = list(hyp)
    vals.append(poly_check("f1 = σ∘z^d1∘σ⁻¹", u1, Polynomial.monomial(d1, 1, exact=u1.exact)))
    vals.append(poly_check("f2 = σ∘γz^d2∘σ⁻¹", u2, Polynomial.monomial(d2, gamma, exact=u2.exact)))
    if not point:
        vals.append(value_check("|γ| = 1", abs(abs(complex(gamma)) - 1), 1e-10))
    return InvariantSetReport("PointCase" if point else "Circles", sigma=sigma, gamma=gamma, validations=tuple(vals))


def _segment_report(f1, f2, T: Segment, hyp) -> InvariantSetReport:
    exact = f1.exact and f2.exact
    a = _snap_scalar((T.z2 - T.z1) / 2)
    b = _snap_scalar((T.z1 + T.z2) / 2)
    if not (is_exact(a) and is_exact(b) and exact):
        a, b = complex(a), complex(b)
    sigma = LinearMap(a, b)
    inv = sigma.inverse()
    vals = list(hyp)
    signs = []
    for name, f in (("f1", f1), ("f2", f2)):
        u = inv(compose(f, sigma.as_poly()))
        t = chebyshev(f.degree)
        if not u.exact:
            t = t.to_approx()
        s = 1 if u.close_to(t, APPROX_RTOL) else -1
        signs.append(s)
        vals.append(poly_check(f"{name} = σ∘±T_n∘σ⁻¹", u, s * t))
    return InvariantSetReport("Segment", sigma=sigma, signs=tuple(signs), validations=tuple(vals))


def _maps_to_itself(mu: LinearMap, T, tol: float) -> Validation:
    ok, h = set_equal(linear_image(mu, T), T, tol)
    return Validation(f"μ(T) = T for μ = {mu}", ok, h)


def _fit_mu(f: Polynomial, q: Polynomial):
    """``μ`` with ``f = μ∘q`` read off the leading and constant terms, or ``None``."""
    a = f.lead / q.lead
    b = f.coeff(0) - a * q.coeff(0)
    mu = LinearMap(a, b)
    if mu(q).close_to(f, APPROX_RTOL):
        return mu
    return None


def _int_log(n: int, r: int):
    k = 0
    while n > 1 and n % r == 0:
        n //= r
        k += 1
    return k if n == 1 else None


def _outer_candidates(h: Polynomial, T, samples: int = 2048) -> list:
    """Linear ``ν`` carrying ``h(T)`` onto ``T``: matching enclosing circles, rotation from farthest points."""
    pts = np.asarray(T.sample(samples))
    hp = h(pts)
    cT, rT = smallest_enclosing_circle(pts)
    cH, rH = smallest_enclosing_circle(hp)
    if rH == 0 or rT == 0:
        return []
    scale = rT / rH
    out = [LinearMap(scale, cT - scale * cH)]
    # rotations: send the farthest point of h(T) to each far point of T
    far_h = hp[np.argmax(np.abs(hp - cH))] - cH
    dist = np.abs(pts - cT)
    far_T = pts[dist >= dist.max() * (1 - 1e-3)] - cT
    for q in far_T[:64]:
        rot = q / far_h
        rot = rot / abs(rot) * scale
        out.append(LinearMap(rot, cT - rot * cH))
    return out


def _refine_outer(f: Polynomial, h: Polynomial, k: int, nu: LinearMap) -> LinearMap:
    """Adjust ``ν`` so that ``f = μ∘(ν∘h)^∘k`` for some linear ``μ`` (least squares)."""
    if k == 1:
        return nu
    fa, ha = f.to_approx(), h.to_approx()
    n = f.degree

    def resid(x):
        cand = LinearMap(complex(x[0], x[1]), complex(x[2], x[3]))
        q = iterate(cand(ha), k)
        a = complex(fa.lead) / complex(q.lead)
        b = complex(fa.coeff(0)) - a * complex(q.coeff(0))
        diff = fa - (q * a + b)
        r = np.array([complex(diff.coeff(j)) for j in range(n + 1)]) / max(1.0, fa.max_abs_coeff())
        return np.concatenate([r.real, r.imag])

    a0, b0 = complex(nu.a), complex(nu.b)
    sol = least_squares(resid, [a0.real, a0.imag, b0.real, b0.imag], xtol=1e-15, ftol=1e-15, gtol=1e-15)
    x = sol.x
    return LinearMap(complex(x[0], x[1]), complex(x[2], x[3]))


def _snapped_polys(p: Polynomial) -> list:
    """Exact candidates near ``p`` at increasing denominators."""
    out = []
    seen = set()
    for den in (1, 2, 3, 4, 6, 8, 12, 16, 32, 64, 100, 1000):
        cs = []
        for c in p.coeffs:
            z = complex(c)
            re = Fraction(z.real).limit_denominator(den)
            im = Fraction(z.imag).limit_denominator(den)
            cs.append(QI(re, im))
        q = Polynomial(cs, exact=True)
        if q.degree == p.degree and q not in seen:
            seen.add(q)
            out.append(q)
    return out


def minimal_invariant_generator(f1: Polynomial, f2: Polynomial, T, tol: Optional[float] = None,
                                _with_maps: bool = False):
    """``(p, s1, s2)`` with ``p⁻¹(T) = T`` and ``f_i = μ_i∘p^∘s_i``, ``μ_i ∈ Σ_T``, ``deg p`` minimal."""
    tol = _set_tol(T) if tol is None else tol
    d1, d2 = f1.degree, f2.degree
    exact = f1.exact and f2.exact
    tested = []
    for r in divisors(d1)[1:]:
        k1, k2 = _int_log(d1, r), _int_log(d2, r)
        if k1 is None or k2 is None or k2 == 0:
            continue
        if r == d1:
            h, _, _ = normalize(f1)
        else:
            rf = right_factor(f1, r)
            if rf is None:
                tested.append(f"degree {r}: no right factor")
                continue
            h = rf[1]
        candidates: list[Polynomial] = []
        if k1 == 1:
            candidates.append(f1)
        if k2 == 1:
            candidates.append(f2)
        for nu in _outer_candidates(h, T):
            nu = _refine_outer(f1, h, k1, nu)
            p_approx = nu(h.to_approx())
            candidates.extend(_snapped_polys(p_approx) if exact else [])
            candidates.append(p_approx)
        best = None
        for p in candidates:
            q1, q2 = iterate(p, k1), iterate(p, k2)
            mu1, mu2 = _fit_mu(f1, q1), _fit_mu(f2, q2)
            if mu1 is None or mu2 is None:
                continue
            inv = _invariant(p, T, tol)
            if not inv.passed:
                tested.append(f"{p}: not invariant (gap {inv.residual:.3g})")
                continue
            v1, v2 = _maps_to_itself(mu1, T, tol), _maps_to_itself(mu2, T, tol)
            if not (v1.passed and v2.passed):
                tested.append(f"{p}: μ outside Σ_T")
                continue
            rank = (0 if p.exact else 1, 0 if mu1.is_identity() and mu2.is_identity() else 1)
            if best is None or rank < best[0]:
                vals = [
                    poly_check("f1 = μ1∘p^∘s1", mu1(q1), f1 if p.exact else f1.to_approx()),
                    poly_check("f2 = μ2∘p^∘s2", mu2(q2), f2 if p.exact else f2.to_approx()),
                    inv, v1, v2,
                ]
                best = (rank, p, mu1, mu2, vals)
                if rank == (0, 0):
                    break
        if best is not None:
            _, p, mu1, mu2, vals = best
            if _with_maps:
                return p, k1, k2, mu1, mu2, vals
            return p, k1, k2
        tested.append(f"degree {r}: no candidate passed")
    raise ClassifyError("no invariant generator found; tested: " + "; ".join(tested[:20]))


# -- commuting up to a linear map ---------------------------------------------------------------

def find_mu(f1: Polynomial, f2: Polynomial) -> Optional[LinearMap]:
    """Linear ``μ`` with ``f1∘f2 = μ∘(f2∘f1)``, or ``None``."""
    if f1.degree == NEG_INF or f2.degree == NEG_INF or f1.degree < 2 or f2.degree < 2:
        raise PolyError("find_mu needs deg f1, deg f2 >= 2")
    _degree_guard(f1.degree * f2.degree)
    L = compose(f1, f2)
    R = compose(f2, f1)
    return _fit_mu(L, R)


def commuting_shadow(f1: Polynomial, f2: Polynomial, d: int) -> tuple:
    """Shadows ``f̃_i = z^(a_i) R_i(z)^d`` with ``f̃_i∘z^d = z^d∘f_i``; returns ``(f̃1, f̃2, validations)``.

    Raises :class:`ClassifyError` when some ``f_i`` is not of the form
    ``z^(a_i) R_i(z^d)``.  Commutation of the shadows is checked only when
    ``f1∘f2 = μ∘f2∘f1`` for some linear ``μ``.
    """
    if d < 1:
        raise ClassifyError("d must be positive")
    shadows = []
    vals = []
    zd = Polynomial.monomial(d, 1, exact=f1.exact and f2.exact)
    for name, f in (("f1", f1), ("f2", f2)):
        tail = _power_tail(f, d) if d > 1 else (f.coeff(0), f, 0)
        if tail is None or (d > 1 and tail[0]):
            raise ClassifyError(f"{name} is not of the form z^a R(z^{d})")
        _, R, a = tail
        if d == 1:
            shadow = f
        else:
            shadow = Polynomial.monomial(a, 1, exact=f.exact) * R ** d
        shadows.append(shadow)
        vals.append(poly_check(f"{name}_shadow∘z^d = z^d∘{name}", compose(shadow, zd), compose(zd, f)))
    s1, s2 = shadows
    mu = find_mu(f1, f2) if f1.degree >= 2 and f2.degree >= 2 else None
    if mu is not None:
        # the shadows commute only when f1, f2 commute up to such a rotation
        a = complex(mu.a)
        vals.append(value_check("μ is a rotation of order dividing d",
                                abs(a ** d - 1) + abs(complex(mu.b)), 1e-12))
        vals.append(poly_check("shadows commute", compose(s1, s2), compose(s2, s1)))
    return s1, s2, tuple(vals)


# -- Julia sets -----------------------------------------------------------------------------------

def julia_equal(f1: Polynomial, f2: Polynomial, params: Optional[JuliaParams] = None,
                threshold: float = JULIA_THRESHOLD) -> tuple:
    """``(equal, hausdorff)`` between sampled Julia sets; a heuristic, not a proof."""
    params = params or JuliaParams()
    J1 = julia_sample(f1, params)
    J2 = julia_sample(f2, params)
    return set_equal(J1, J2, threshold)


@dataclass(frozen=True, eq=False)
class Theorem4Report:
    common_invariant: bool
    julia_equal: bool
    mu_condition: bool
    mu: Optional[LinearMap]
    hausdorff: float
    consistent: bool
    validations: tuple = ()
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "condition_1_common_invariant_set": self.common_invariant,
            "condition_2_julia_equal": self.julia_equal,
            "condition_3_mu": self.mu_condition,
            "mu": None if self.mu is None else self.mu.to_json(),
            "mu_text": None if self.mu is None else str(self.mu),
            "hausdorff": self.hausdorff,
            "consistent": self.consistent,
            "diagnostics": self.diagnostics,
        }


def theorem4_suite(f1: Polynomial, f2: Polynomial, T1, T2, params: Optional[JuliaParams] = None,
                   threshold: float = JULIA_THRESHOLD) -> Theorem4Report:
    params = params or JuliaParams()
    diag: dict = {}
    vals = []
    for name, f, T in (("T1", f1, T1), ("T2", f2, T2)):
        v = _invariant(f, T, _set_tol(T))
        vals.append(Validation(f"precondition {name}", v.passed, v.residual))
        if not v.passed:
            diag[f"precondition_{name}"] = f"f⁻¹({name}) ≠ {name} (gap {v.residual:.3g})"
    J1, J2 = julia_sample(f1, params), julia_sample(f2, params)
    eq, h = set_equal(J1, J2, threshold)
    common = False
    for name, T in (("T1", T1), ("T2", T2), ("J1", J1), ("J2", J2)):
        if isinstance(T, FinitePoints) and len(T.points) == 1:
            continue
        tol = _set_tol(T)
        a, b = _invariant(f1, T, tol), _invariant(f2, T, tol)
        if a.passed and b.passed:
            common = True
            diag["common_invariant_set"] = name
            break
    mu = find_mu(f1, f2)
    mu_ok = False
    if mu is not None:
        m1 = _maps_to_itself(mu, T1, _set_tol(T1))
        m2 = _maps_to_itself(mu, T2, _set_tol(T2))
        mu_ok = m1.passed and m2.passed
        vals += [m1, m2]
    conds = (common, eq, mu_ok)
    consistent = len(set(conds)) == 1
    if not consistent:
        names = ["common invariant set", "equal Julia sets", "f1∘f2 = μ∘f2∘f1 with μ ∈ Σ_T1 ∩ Σ_T2"]
        diag["disagreement"] = {n: c for n, c in zip(names, conds)}
    vals.append(Validation("conditions agree", consistent, 0.0 if consistent else 1.0))
    return Theorem4Report(common, eq, mu_ok, mu, h, consistent, tuple(vals), diag)


# -- chain harness ----------------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ChainEntry:
    r: int
    A: Polynomial
    B: Polynomial
    L: object
    validations: tuple


@dataclass(frozen=True, eq=False)
class ChainReport:
    depth: int
    entries: tuple
    base_fiber: object
    witness: SharedPreimageWitness

    @property
    def passed(self) -> bool:
        return all(v.passed for e in self.entries for v in e.validations)

    @property
    def max_residual(self) -> float:
        return max((v.residual for e in self.entries for v in e.validations), default=0.0)

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "base_fiber": self.base_fiber.to_json(),
            "entries": [
                {
                    "r": e.r,
                    "deg_A": e.A.degree,
                    "deg_B": e.B.degree,
                    "A": str(e.A) if e.A.degree <= 64 else None,
                    "B": str(e.B) if e.B.degree <= 64 else None,
                    "L": e.L.to_json(),
                }
                for e in self.entries
            ],
        }


def build_chain(f1: Polynomial, f2: Polynomial, K1, K2, depth: int, tol: float = 1e-8,
                degree_cap: int = DEGREE_CAP) -> ChainReport:
    """Levels ``(A_r, B_r, L_r)`` with ``A_r⁻¹(L_r) = B_r⁻¹(L_r)`` equal to the base fiber.

    Level 1 is ``(f1_tilde, f2_tilde, K1)``.  From a pair ``(p, q)`` with
    ``deg p = d1/d`` the shared-preimage witness gives ``G1∘p = G2∘q``; then
    ``A_(r+1) = G2∘A_r``, ``B_(r+1) = G1∘B_r``, ``L_(r+1) = G1(L_r)`` and the
    next pair is ``(G2, G1)``.  The fiber identity past level 1 needs
    ``K1 = K2``; it is validated, not assumed.
    """
    if depth < 1:
        raise ClassifyError("depth must be positive")
    w = classify_shared_preimage(f1, f2)
    if isinstance(w, NoSolution):
        raise ClassifyError(f"no shared-preimage witness: {w.reason}")
    if w.case == COMPOSITE:
        raise ClassifyError("build_chain needs a non-composite witness")
    if w.swapped:
        K1, K2 = K2, K1
    e2 = w.f2.degree // w.d
    if e2 ** depth > degree_cap:
        raise ClassifyError(f"degree (d2/d)^{depth} = {e2 ** depth} exceeds the cap of {degree_cap}")
    A, B = w.f1_tilde, w.f2_tilde
    base = preimage(A, K1)
    entries = []
    v_b = set_equal(preimage(B, K2), base, tol)
    entries.append(ChainEntry(1, A, B, K1, (
        Validation("A_1⁻¹(L_1) = W(K)", True, 0.0),
        Validation("B_1⁻¹(K2) = W(K)", v_b[0], v_b[1]),
    )))
    p, q, L = A, B, K1
    for r in range(2, depth + 1):
        lw = classify_shared_preimage(p, q)
        if isinstance(lw, NoSolution) or lw.case == COMPOSITE:
            raise ClassifyError(f"level {r}: pair ({p}, {q}) has no non-composite witness")
        G1, G2 = lw.g1, lw.g2
        A = compose(G2, A)
        B = compose(G1, B)
        L = image(G1, L)
        va = set_equal(preimage(A, L), base, tol)
        vb = set_equal(preimage(B, L), base, tol)
        entries.append(ChainEntry(r, A, B, L, (
            Validation(f"A_{r}⁻¹(L_{r}) = W(K)", va[0], va[1]),
            Validation(f"B_{r}⁻¹(L_{r}) = W(K)", vb[0], vb[1]),
        )))
        p, q = G2, G1
    return ChainReport(depth, tuple(entries), base, w)

"""Command-line entry point: one JSON report per invocation on stdout.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from typing import Optional, Sequence

import numpy as np

from . import classify as cl
from . import minimax as mm
from .decompose import DecomposeError, full_decomposition, gcrc
from .poly import PolyError, compose, parse_poly
from .report import make_report
from .sets import (
    ConcentricCircles,
    FinitePoints,
    JULIA_METHODS,
    JuliaParams,
    Segment,
    julia_sample,
    set_equal,
    symmetry_group,
)
from .validation import Validation, poly_check

log = logging.getLogger("polyshare")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NONCONVERGED = 0, 1, 2, 3

SET_GRAMMAR = (
    "set literals: points:re,im;re,im;...  circle:cx,cy,r[,r2,...]  "
    "segment:x1,y1,x2,y2  julia:<poly>"
)


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str, what: str) -> list:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad number in {what} literal {text!r}") from None


def parse_set(text: str, params: JuliaParams, tol: float = 1e-8):
    """Parse a set literal; see ``SET_GRAMMAR``."""
    kind, sep, body = text.partition(":")
    if not sep:
        raise UsageError(f"set literal {text!r} lacks a type prefix; {SET_GRAMMAR}")
    kind = kind.strip().lower()
    if kind == "points":
        pts = []
        for item in body.split(";"):
            if not item.strip():
                continue
            v = _floats(item, "points")
            if len(v) not in (1, 2):
                raise UsageError(f"point {item!r} needs re[,im]")
            pts.append(complex(v[0], v[1] if len(v) == 2 else 0.0))
        if not pts:
            raise UsageError("empty point set")
        return FinitePoints(np.array(pts), tol)
    if kind == "circle":
        v = _floats(body, "circle")
        if len(v) < 3:
            raise UsageError("circle needs cx,cy,r[,r2,...]")
        return ConcentricCircles(complex(v[0], v[1]), tuple(sorted(v[2:])))
    if kind == "segment":
        v = _floats(body, "segment")
        if len(v) != 4:
            raise UsageError("segment needs x1,y1,x2,y2")
        return Segment(complex(v[0], v[1]), complex(v[2], v[3]))
    if kind == "julia":
        return julia_sample(_poly(body), params)
    raise UsageError(f"unknown set type {kind!r}; {SET_GRAMMAR}")


def _poly(text: str):
    try:
        return parse_poly(text)
    except PolyError as e:
        raise UsageError(f"cannot parse polynomial {text!r}: {e}") from None


# -- subcommands ------------------------------------------------------------------------------

def _cmd_decompose(a, params):
    f = _poly(a.poly)
    dec = full_decomposition(f)
    vals = [poly_check("recomposition equals input", dec.recompose(), f)]
    result = {
        "outer": dec.outer,
        "outer_text": str(dec.outer),
        "chain": [p.to_json() for p in dec.chain],
        "chain_text": [str(p) for p in dec.chain],
        "degrees": dec.degrees,
    }
    return {"poly": str(f)}, result, vals, {}


def _cmd_gcrc(a, params):
    f1, f2 = _poly(a.f1), _poly(a.f2)
    W, A, B = gcrc(f1, f2)
    vals = [poly_check("f1 = A∘W", compose(A, W), f1), poly_check("f2 = B∘W", compose(B, W), f2)]
    result = {"W": W, "A": A, "B": B, "text": {"W": str(W), "A": str(A), "B": str(B)}, "degree": W.degree}
    return {"f1": str(f1), "f2": str(f2)}, result, vals, {}


def _cmd_classify(a, params):
    f1, f2 = _poly(a.f1), _poly(a.f2)
    inputs = {"f1": str(f1), "f2": str(f2), "K1": a.K1, "K2": a.K2}
    w = cl.classify_shared_preimage(f1, f2)
    if isinstance(w, cl.NoSolution):
        return inputs, w.to_json(), [], {"reason": w.reason}
    if a.K1 and a.K2:
        if w.case == cl.COMPOSITE:
            raise UsageError("K1/K2 apply only to PowerForm and ChebyshevForm witnesses")
        K1, K2 = parse_set(a.K1, params, a.tol), parse_set(a.K2, params, a.tol)
        w = cl.construct_K3(w, K1, K2, tol=max(a.tol, 1e-6))
    return inputs, w.to_json(), w.validations, {}


def _cmd_classify_target(a, params):
    f1, f2 = _poly(a.f1), _poly(a.f2)
    T = parse_set(a.set, params, a.tol)
    r = cl.classify_same_target(f1, f2, T)
    return {"f1": str(f1), "f2": str(f2), "T": a.set}, r.to_json(), r.validations, {"note": r.note}


def _cmd_classify_invariant(a, params):
    f1, f2 = _poly(a.f1), _poly(a.f2)
    T = parse_set(a.set, params, a.tol)
    r = cl.classify_invariant(f1, f2, T, params=params)
    return {"f1": str(f1), "f2": str(f2), "T": a.set}, r.to_json(), r.validations, {}


def _cmd_find_mu(a, params):
    f1, f2 = _poly(a.f1), _poly(a.f2)
    mu = cl.find_mu(f1, f2)
    inputs = {"f1": str(f1), "f2": str(f2)}
    if mu is None:
        return inputs, {"mu": None}, [], {"reason": "f1∘f2 is not a linear image of f2∘f1"}
    L, R = compose(f1, f2), compose(f2, f1)
    return inputs, {"mu": mu, "mu_text": str(mu)}, [poly_check("f1∘f2 = μ∘f2∘f1", L, mu(R))], {}


def _cmd_julia_compare(a, params):
    f1, f2 = _poly(a.f1), _poly(a.f2)
    J1, J2 = julia_sample(f1, params), julia_sample(f2, params)
    eq, h = set_equal(J1, J2, a.threshold)
    result = {"equal": eq, "hausdorff": h, "threshold": a.threshold, "samples": params.samples,
              "method": params.method}
    if a.format == "csv":
        result["_csv"] = [("J1", J1.samples), ("J2", J2.samples)]
    return {"f1": str(f1), "f2": str(f2)}, result, [], {"note": "sampled comparison, not a proof"}


def _cmd_symmetry(a, params):
    S = parse_set(a.set, params, a.tol)
    g = symmetry_group(S)
    out = g.to_json()
    if g.generator is not None:
        out["generator_text"] = str(g.generator)
    return {"set": a.set}, out, [], {}


def _cmd_minimax(a, params):
    R = parse_set(a.set, params, a.tol)
    pts = np.asarray(R.sample(a.samples_set))
    if a.monic is not None:
        res = mm.monic_least_deviation(pts, a.monic)
    else:
        if a.phi is None or a.m is None:
            raise UsageError("minimax needs --monic N or both --phi and --m")
        res = mm.least_deviation(pts, _poly(a.phi), a.m)
    result = {
        "poly": res.poly, "poly_text": str(res.poly), "deviation": res.deviation,
        "lower_bound": res.lower_bound, "iterations": res.iterations, "converged": res.converged,
        "basis": res.basis, "points": int(pts.size),
    }
    if a.format == "csv":
        result["_csv"] = [("R", pts)]
    inputs = {"set": a.set, "phi": a.phi, "m": a.m, "monic": a.monic}
    return inputs, result, [], {"nonconverged": not res.converged}


def _cmd_verify(a, params):
    P = _poly(a.P)
    R = parse_set(a.set, params, a.tol)
    tol = a.tol if a.tol_given else 1e-6
    if a.theorem == "thm21":
        rep = mm.verify_thm21(P, R, samples=a.samples_set, tol=tol)
    elif a.theorem == "thm22":
        if a.m is None:
            raise UsageError("verify thm22 needs --m")
        rep = mm.verify_thm22(P, R, a.m, samples=a.samples_set, tol=tol)
    else:
        if a.m is None or a.phi is None:
            raise UsageError("verify thm23 needs --phi and --m")
        rep = mm.verify_thm23(P, R, _poly(a.phi), a.m, samples=a.samples_set, tol=tol)
    vals = [
        Validation("coefficient gap", rep.max_coeff_gap <= tol, rep.max_coeff_gap),
        Validation("deviation gap", rep.deviation_gap <= tol, rep.deviation_gap),
    ]
    inputs = {"theorem": a.theorem, "P": str(P), "set": a.set, "m": a.m, "phi": a.phi}
    diag = {"nonconverged": not rep.details.get("converged", True)}
    return inputs, rep.to_json(), vals, diag


def _cmd_chain(a, params):
    f1, f2 = _poly(a.f1), _poly(a.f2)
    K1, K2 = parse_set(a.K1, params, a.tol), parse_set(a.K2, params, a.tol)
    r = cl.build_chain(f1, f2, K1, K2, a.depth, tol=max(a.tol, 1e-8))
    vals = [v for e in r.entries for v in e.validations]
    inputs = {"f1": str(f1), "f2": str(f2), "K1": a.K1, "K2": a.K2, "depth": a.depth}
    return inputs, r.to_json(), vals, {}


# -- parser -------------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="set and comparison tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=None,
                        help="Julia samples (default 10000); parametric set density (default 128)")
    common.add_argument("--depth", type=int, default=3)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--no-timing", action="store_true")
    common.add_argument("--julia-method", choices=JULIA_METHODS, default="modified")

    p = _Parser(prog="polyshare", description="Polynomials sharing preimages of compact sets.",
                epilog=SET_GRAMMAR)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("decompose", parents=[common], help="maximal decomposition chain")
    s.add_argument("poly")
    s.set_defaults(run=_cmd_decompose)

    for name, fn, hlp in (
        ("gcrc", _cmd_gcrc, "greatest common right component"),
        ("find-mu", _cmd_find_mu, "linear μ with f1∘f2 = μ∘f2∘f1"),
        ("julia-compare", _cmd_julia_compare, "Hausdorff distance of sampled Julia sets"),
    ):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("f1")
        s.add_argument("f2")
        if name == "julia-compare":
            s.add_argument("--threshold", type=float, default=cl.JULIA_THRESHOLD)
        s.set_defaults(run=fn)

    s = sub.add_parser("classify", parents=[common], help="shared-preimage witness")
    s.add_argument("f1")
    s.add_argument("f2")
    s.add_argument("--K1")
    s.add_argument("--K2")
    s.set_defaults(run=_cmd_classify)

    for name, fn in (("classify-target", _cmd_classify_target), ("classify-invariant", _cmd_classify_invariant)):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("f1")
        s.add_argument("f2")
        s.add_argument("--set", required=True)
        s.set_defaults(run=fn)

    s = sub.add_parser("symmetry", parents=[common], help="rotational symmetry group of a set")
    s.add_argument("set")
    s.set_defaults(run=_cmd_symmetry)

    s = sub.add_parser("minimax", parents=[common], help="least-deviation polynomial on sampled points")
    s.add_argument("--set", required=True)
    s.add_argument("--phi")
    s.add_argument("--m", type=int)
    s.add_argument("--monic", type=int)
    s.set_defaults(run=_cmd_minimax)

    s = sub.add_parser("verify", parents=[common], help="composition laws for least deviation")
    s.add_argument("theorem", choices=("thm21", "thm22", "thm23"))
    s.add_argument("--P", required=True)
    s.add_argument("--set", required=True)
    s.add_argument("--m", type=int)
    s.add_argument("--phi")
    s.set_defaults(run=_cmd_verify)

    s = sub.add_parser("chain", parents=[common], help="iterated shared-preimage chain")
    s.add_argument("f1")
    s.add_argument("f2")
    s.add_argument("--K1", required=True)
    s.add_argument("--K2", required=True)
    s.set_defaults(run=_cmd_chain)
    return p


def _protect_negatives(argv: list) -> list:
    """Keep polynomial arguments such as ``-z^3`` from being read as options."""
    out = []
    for arg in argv:
        if arg.startswith("-") and not arg.startswith("--") and arg not in ("-h",):
            arg = " " + arg
        out.append(arg)
    return out


def _write_csv(blocks, out) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["set", "re", "im"])
    for label, pts in blocks:
        for z in np.asarray(pts).ravel():
            w.writerow([label, repr(float(z.real)), repr(float(z.imag))])
    out.write(buf.getvalue())


def dispatch(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        a = parser.parse_args(_protect_negatives(argv))
    except UsageError as e:
        err.write(f"usage error: {e}\n{parser.format_help()}")
        return EXIT_USAGE
    a.tol_given = a.tol is not None
    if a.tol is None:
        a.tol = 1e-8
    if a.depth < 1:
        err.write("usage error: --depth must be positive\n")
        return EXIT_USAGE
    params = JuliaParams(method=a.julia_method, samples=a.samples or 10_000, seed=a.seed)
    a.samples_set = a.samples or (129 if getattr(a, "theorem", None) == "thm23" else 128)

    t0 = time.perf_counter()
    diagnostics: dict = {}
    code = EXIT_OK
    try:
        inputs, result, vals, diagnostics = a.run(a, params)
    except UsageError as e:
        err.write(f"usage error: {e}\n{parser.format_help()}")
        return EXIT_USAGE
    except (cl.HypothesisError, mm.HypothesisError) as e:
        inputs, result, vals = {"argv": list(argv)}, None, []
        diagnostics = {"error": "hypothesis", "message": str(e)}
        code = EXIT_FAIL
    except cl.SetValidationError as e:
        inputs, result, vals = {"argv": list(argv)}, None, e.validations
        diagnostics = {"error": "validation", "message": str(e)}
        code = EXIT_FAIL
    except (cl.ClassifyError, DecomposeError, PolyError, mm.MinimaxError, ValueError) as e:
        inputs, result, vals = {"argv": list(argv)}, None, []
        diagnostics = {"error": type(e).__name__, "message": str(e)}
        code = EXIT_FAIL
    elapsed = None if a.no_timing else (time.perf_counter() - t0) * 1000.0

    blocks = result.pop("_csv", None) if isinstance(result, dict) else None
    if code == EXIT_OK:
        if any(not v.passed for v in vals):
            code = EXIT_FAIL
        elif diagnostics.pop("nonconverged", False):
            code = EXIT_NONCONVERGED
            diagnostics["warning"] = "solver did not converge"
        diagnostics.pop("nonconverged", None)
    if a.format == "csv" and blocks is not None:
        _write_csv(blocks, out)
        return code
    report = make_report(a.command, inputs, result, vals, diagnostics, elapsed)
    out.write(json.dumps(report, indent=2, ensure_ascii=False, sort_keys=False) + "\n")
    return code


def main() -> None:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(dispatch())

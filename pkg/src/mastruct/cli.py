"""Command-line front end.

Exit codes: 0 when the check passes or the form is classified, 1 when a check
fails, 2 on input errors. A JSON report is always produced (stdout, or the
file given by ``--json``).
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction

import numpy as np

from . import fields, hitchin, jsonio, matode, monge_ampere as ma, stenzel, symplectic
from .exterior import EXACT, DegreeError, Form
from .jsonio import InputError

OK, FAILED, BAD_INPUT = 0, 1, 2


def conventions() -> dict:
    lam = {f"row{r}": hitchin.pfaffian(hitchin.table1_representative(r, 2)) for r in range(1, 10)}
    return {
        "basis": "indices 1..3 = e1..e3 (x), 4..6 = f1..f3 (p); JSON indices are 1-based",
        "Omega": "e1*^f1* + e2*^f2* + e3*^f3*",
        "theta": "-Omega^3/6 = e1*^e2*^e3*^f1*^f2*^f3*",
        "K": "xi(K X) theta = xi ^ i_X w ^ w",
        "lambda": "Tr(K^2)/6",
        "qK": "Omega(K X, Y)",
        "qK_over_qLR": hitchin.QK_OVER_QLR,
        "omega_wedge_dual_over_theta_normalized": hitchin.WEDGE_DUAL_CONSTANT,
        "table1_lambda_gamma2": lam,
        "table1_lambda_formula": {"row1": "gamma^2", "row2": "-4 gamma^2", "row3": "-4 gamma^2",
                                  "rows4-9": "0"},
    }


# ---------------------------------------------------------------------------
# input helpers


def _read_form(path, degree: int | None = 3) -> Form:
    w = jsonio.form_from_json(jsonio.load_json(path))
    if degree is not None and w.degree != degree:
        raise InputError(f"expected a {degree}-form, got degree {w.degree}")
    return w


def _gamma(text) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad gamma {text!r}") from exc


def _equation(name, gamma) -> ma.MAEquation:
    try:
        return ma.builtin(name, _gamma(gamma))
    except ValueError as exc:
        raise InputError(str(exc)) from exc


_REGION_FNS = {
    "xy+yz+zx": lambda x: x[0] * x[1] + x[1] * x[2] + x[2] * x[0],
    "x^2+2y": lambda x: x[0] ** 2 + 2 * x[1],
    "x": lambda x: x[0],
    "y": lambda x: x[1],
    "z": lambda x: x[2],
}


def _region(manifest):
    jsonio.validate({k: manifest[k] for k in ("box", "region") if k in manifest}, "region")
    box = manifest.get("box", [[-1.0, 1.0]] * 3)
    cons = manifest.get("region", [])

    def inside(x):
        for c in cons:
            v = _REGION_FNS[c["fn"]](x)
            if "min" in c and not v > c["min"]:
                return False
            if "max" in c and not v < c["max"]:
                return False
        return True

    return box, inside


def _solution(manifest) -> ma.CandidateSolution:
    jsonio.validate(manifest, "solution")
    kind = manifest["solution"]
    params = manifest.get("params", {})
    if kind == "hess-integral":
        return ma.integral_solution(float(params.get("a", 1.0)), float(params.get("b", 1.0)))
    if kind == "chynoweth-sewell-regular":
        return ma.chynoweth_sewell_regular()
    if kind == "quadratic":
        H = np.asarray(params.get("hessian"), dtype=float)
        if H.shape != (3, 3) or np.max(np.abs(H - H.T)) > 0:
            raise InputError("quadratic solution needs a symmetric 3x3 'hessian'")
        return ma.quadratic_solution(H)
    raise InputError("table solutions are checked point by point, not sampled")


def _report(args, report: dict, code: int) -> int:
    report = dict(report)
    report["conventions"] = conventions()
    report["exitCode"] = code
    text = jsonio.dumps(report)
    if getattr(args, "json", None):
        with open(args.json, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


# ---------------------------------------------------------------------------
# subcommands


def cmd_classify(args):
    w = _read_form(args.form)
    if w.mode != EXACT:
        raise InputError("classification needs an exact form")
    if not symplectic.is_effective(w):
        raise InputError("form is not effective")
    cls = hitchin.classify(w)
    rep = {"effective": True, "orbit": cls.label, "lambda": cls.extra["lambda"],
           "signatureQK": list(cls.signature), "annihilatorDim": cls.annihilator_dim}
    return rep, (FAILED if cls.kind is hitchin.Kind.UNCLASSIFIED else OK)


def _decomposition_json(d: hitchin.Decomposition) -> dict:
    if d.kind == "hyperbolic":
        return {"kind": d.kind, "alpha": d.alpha, "beta": d.beta}
    return {"kind": d.kind, "alphaRe": d.alpha_re, "alphaIm": d.alpha_im}


def cmd_decompose(args):
    w = _read_form(args.form)
    eff = symplectic.is_effective(w)
    lam = hitchin.pfaffian(w)
    rep = {"effective": eff, "lambda": lam}
    if lam == 0:
        rep["error"] = "degenerate form, no Hitchin decomposition"
        return rep, FAILED
    d = hitchin.decompose(w)
    rep["decomposition"] = _decomposition_json(d)
    rep["dual"] = hitchin.dual(w)
    ann = [len(hitchin.annihilator(x)) for x in (d.alpha, d.beta)] if d.kind == "hyperbolic" else \
        [int(hitchin.complex_annihilator(d.alpha_re, d.alpha_im).shape[0])]
    rep["annihilatorDims"] = ann
    if eff:
        rep["normalized"] = hitchin.normalize(w)
        cls = hitchin.classify(w) if w.mode == EXACT else None
        rep["orbit"] = cls.label if cls else None
        rep["signatureQK"] = list(hitchin.signature(hitchin.hitchin_data(w).qK))
    return rep, OK


def cmd_invariants(args):
    w = _read_form(args.form)
    eff = symplectic.is_effective(w)
    K = hitchin.k_endomorphism(w)
    lam = hitchin.pfaffian(w)
    rep = {"effective": eff, "lambda": lam, "K": jsonio.matrix_to_json(K),
           "KinSp6": hitchin.in_sp6(K)}
    K2 = K @ K
    rep["KsquaredIsLambdaId"] = bool(all(
        (K2[i, j] == (lam if i == j else 0)) if w.mode == EXACT else
        abs(K2[i, j] - (lam if i == j else 0)) < 1e-9 for i in range(6) for j in range(6)))
    if eff:
        qK, qLR = hitchin.quadratic_invariants(w)
        rep.update({"qK": jsonio.matrix_to_json(qK), "qLR": jsonio.matrix_to_json(qLR),
                    "signatureQK": list(hitchin.signature(qK))})
    return rep, OK


def _samples3(manifest, count, seed):
    box, inside = _region(manifest)
    try:
        return ma.sample_region(inside, box, count, seed)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def cmd_verify_solution(args):
    eq = _equation(args.eq, args.gamma)
    manifest = jsonio.load_json(args.solution)
    jsonio.validate(manifest, "solution")
    if manifest["solution"] == "table":
        rows = manifest["table"]
        res = [float(ma.operator_value(eq.omega.to_float(), np.asarray(r["hessian"], float)))
               for r in rows]
        pts = [r["x"] for r in rows]
    else:
        f = _solution(manifest)
        pts = _samples3(manifest, args.samples, args.seed)
        res = [ma.residual(eq, f, x) for x in pts]
    worst = float(np.max(np.abs(res)))
    rep = {"equation": eq.name, "gamma": eq.gamma, "pde": str(ma.symbolic_pde(eq)),
           "solution": manifest["solution"], "samples": len(res), "maxAbsResidual": worst,
           "tolerance": args.tol, "passed": worst < args.tol,
           "worstPoint": [float(v) for v in pts[int(np.argmax(np.abs(res)))]]}
    return rep, (OK if rep["passed"] else FAILED)


def _surface(manifest, eq_gamma):
    jsonio.validate(manifest, "surface")
    kind = manifest["surface"]
    params = manifest.get("params", {})
    if kind == "chynoweth-sewell":
        gamma = float(params.get("gamma", eq_gamma))
        return ma.chynoweth_sewell_generalized(float(params.get("b", 1.0)), gamma)
    if kind == "graph":
        return ma.graph_surface(_solution(manifest.get("solution", {})))
    raise InputError("table surfaces are checked point by point, not sampled")


def cmd_verify_generalized(args):
    eq = _equation(args.eq, args.gamma)
    manifest = jsonio.load_json(args.surface)
    jsonio.validate(manifest, "surface")
    if manifest["surface"] == "table":
        rows = manifest["table"]
        table = {tuple(r["s"]): np.asarray(r["jacobian"], float) for r in rows}
        L = ma.ParamSurface(lambda s: None, lambda s: table[tuple(s)])
        pts = [np.asarray(r["s"], float) for r in rows]
    else:
        L = _surface(manifest, float(eq.gamma))
        pts = _samples3(manifest, args.samples, args.seed)
    r = ma.check_generalized(eq, L, pts, args.tol)
    rep = {"equation": eq.name, "gamma": eq.gamma, "surface": manifest["surface"],
           "samples": r.samples, "maxOmegaPullback": r.max_symplectic,
           "maxFormPullback": r.max_form, "flaggedRankDeficient": r.flagged,
           "tolerance": args.tol, "passed": r.passed}
    return rep, (OK if r.passed else FAILED)


def cmd_structure(args):
    eq = _equation(args.eq, args.gamma)
    try:
        rep = ma.geometric_structure(eq)
    except ValueError as exc:
        return {"equation": eq.name, "error": str(exc)}, FAILED
    rep["decomposition"] = _decomposition_json(rep["decomposition"])
    rep["qK"] = jsonio.matrix_to_json(rep["qK"])
    rep["signatureQK"] = list(rep["signatureQK"])
    return rep, OK


def _structure_field(manifest):
    jsonio.validate(manifest, "structure")
    if "form" in manifest:
        w = jsonio.form_from_json(manifest["form"])
        if w.degree != 3:
            raise InputError("structure form must have degree 3")
    else:
        e = manifest["equation"]
        w = _equation(e["name"], e.get("gamma", 1)).omega
    if not symplectic.is_effective(w):
        raise InputError("structure form is not effective")
    gen = manifest.get("generator", {"kind": "constant"})
    s = manifest["samples"]
    box = fields.Box.from_intervals(s["box"])
    if "n" in s:
        pts = box.grid(s["n"])
    else:
        pts = box.random(s.get("random", 10), s.get("seed", 0))
    kind = gen["kind"]
    if kind == "constant":
        return w, fields.FormField.constant(w), None, pts
    if kind == "pullback":
        ff, gram = fields.pulled_back_structure(w, gen.get("seed", 0), gen.get("eps", 0.2))
        return w, ff, gram, pts
    return w, fields.sheared_structure(w, gen.get("seed", 0), gen.get("eps", 0.3)), None, pts


def cmd_local_constancy(args):
    manifest = jsonio.load_json(args.structure)
    w, ff, gram, pts = _structure_field(manifest)
    tol = fields.Tolerances(closed=args.closed_tol, curvature_rel=args.curvature_rel,
                            curvature_abs=args.curvature_abs)
    rep = fields.local_constancy_report(ff, pts, tol, gram=gram, richardson=args.richardson)
    out = rep.to_dict()
    out["form"] = w
    ok = rep.verdict is fields.Verdict.LOCALLY_CONSTANT
    if args.expect == "not-locally-constant":
        ok = rep.verdict is fields.Verdict.NOT_LOCALLY_CONSTANT
    out["expected"] = args.expect
    return out, (OK if ok else FAILED)


def cmd_stenzel(args):
    try:
        ode = stenzel.solve_ode(args.c, args.tau_max, args.step)
    except stenzel.StenzelError as exc:
        raise InputError(str(exc)) from exc
    rep = stenzel.stenzel_report(ode, args.samples, args.seed, args.curvature_samples,
                                 args.closed_tol)
    out = rep.to_dict()
    out["tauMax"] = args.tau_max
    out["step"] = args.step
    checks = {
        "odeResidualBelow1e-8": out["odeMaxResidual"] < 1e-8,
        "cyRatioSpreadBelow0.005": out["cyRatio"]["relativeSpread"] < 5e-3,
        "elliptic": out["elliptic"],
        "closednessBelowTol": max(out["maxClosednessDefectOmega"],
                                  out["maxClosednessDefectDual"]) < args.closed_tol,
        "curvatureAbove10xNoise": out["nonFlat"],
    }
    out["checks"] = checks
    return out, (OK if all(checks.values()) else FAILED)


def cmd_matode(args):
    Ms = matode.random_generators(args.manufactured_seed, args.m)
    C, H = matode.manufactured(Ms)
    try:
        sol = matode.integrate(C, args.box, args.step)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    rng = np.random.default_rng(args.manufactured_seed)
    pts = rng.uniform(-args.box, args.box, (64, 3))
    per_axis = matode.residual_per_axis(sol, C)
    out = {
        "box": args.box, "step": args.step, "m": args.m, "seed": args.manufactured_seed,
        "zeroCurvatureDefect": matode.zero_curvature_check(C, pts).max_defect,
        "residualPerAxis": per_axis,
        "residual": max(per_axis),
        "tolerance": args.tol,
        "stages": sol.diagnostics,
        "G0MinusId": float(np.max(np.abs(sol.G[tuple([len(sol.axis) // 2] * 3)] - np.eye(args.m)))),
    }
    if args.convergence:
        steps = [args.step * 2 ** k for k in range(3, -1, -1)]
        out["convergence"] = matode.convergence(C, args.box, steps)
    out["passed"] = out["residual"] < args.tol
    return out, (OK if out["passed"] else FAILED)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mastruct", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(fn=fn)
        sp.add_argument("--json", metavar="PATH", help="write the report here instead of stdout")
        return sp

    for name, fn, h in (("classify", cmd_classify, "orbit of an effective 3-form"),
                        ("decompose", cmd_decompose, "decomposition, dual and normalization"),
                        ("invariants", cmd_invariants, "K, lambda and the quadratic invariants")):
        add(name, fn, h).add_argument("form", help="form JSON file")

    sp = add("verify-solution", cmd_verify_solution, "residual of a candidate solution")
    sp.add_argument("--eq", required=True, choices=ma.BUILTINS)
    sp.add_argument("--gamma", default="1")
    sp.add_argument("--solution", required=True)
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol", type=float, default=1e-6)

    sp = add("verify-generalized", cmd_verify_generalized, "Lagrangian + form pullback check")
    sp.add_argument("--eq", required=True, choices=ma.BUILTINS)
    sp.add_argument("--gamma", default="1")
    sp.add_argument("--surface", required=True)
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol", type=float, default=1e-6)

    sp = add("structure", cmd_structure, "geometric structure of a built-in equation")
    sp.add_argument("--eq", required=True, choices=ma.BUILTINS)
    sp.add_argument("--gamma", default="1")

    sp = add("local-constancy", cmd_local_constancy, "closedness and flatness report")
    sp.add_argument("structure", help="structure manifest JSON")
    sp.add_argument("--closed-tol", type=float, default=1e-6)
    sp.add_argument("--curvature-rel", type=float, default=1e-3)
    sp.add_argument("--curvature-abs", type=float, default=1e-9)
    sp.add_argument("--richardson", action="store_true")
    sp.add_argument("--expect", choices=["locally-constant", "not-locally-constant"],
                    default="locally-constant")

    sp = add("stenzel", cmd_stenzel, "the non-flat Calabi-Yau example")
    sp.add_argument("--c", type=float, default=1.0)
    sp.add_argument("--tau-max", type=float, default=3.0)
    sp.add_argument("--step", type=float, default=1e-3)
    sp.add_argument("--samples", type=int, default=50)
    sp.add_argument("--curvature-samples", type=int, default=12)
    sp.add_argument("--seed", type=int, default=7)
    sp.add_argument("--closed-tol", type=float, default=1e-3)

    sp = add("matode", cmd_matode, "zero-curvature matrix system on a manufactured case")
    sp.add_argument("--box", type=float, default=0.5)
    sp.add_argument("--step", type=float, default=1 / 64)
    sp.add_argument("--manufactured-seed", type=int, default=3)
    sp.add_argument("--m", type=int, default=3)
    sp.add_argument("--tol", type=float, default=1e-5)
    sp.add_argument("--convergence", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return BAD_INPUT if exc.code else OK
    try:
        rep, code = args.fn(args)
    except (InputError, DegreeError) as exc:
        return _report(args, {"command": args.command, "error": str(exc)}, BAD_INPUT)
    rep["command"] = args.command
    return _report(args, rep, code)


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()

"""Command line front end.

Every command reads a JSON model file and writes one JSON document to
stdout (or ``--output``).  Exit codes: 0 success, 2 invalid input, 3 a
solver failed (the document then carries an ``error`` section), 4 an
internal consistency check failed.
"""
from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .conjugate import conjugate
from .core import kerridge_inaccuracy
from .duals import DualStatus, active_passive_solve, diagnose_gap, smith_solve
from .elcompare import compare, el_solve, profile_estimating_equations
from .exceptions import (
    ConvergenceError,
    DimensionTooLargeError,
    InfeasibleError,
    InvariantViolation,
    SimplexMLEError,
    UnboundedError,
    ValidationError,
)
from .geometry import classify
from .pp import pp_solve
from .serialize import dumps, load_model, trace_csv
from .validation import check_tolerance, check_vector, default_tolerance

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_INVARIANT = 4


class SolverFailure(Exception):
    """A solver gave up; carries the partial document to emit."""

    def __init__(self, doc: dict):
        super().__init__(doc.get("error", {}).get("message", "solver failure"))
        self.doc = doc


def _labels(spec) -> list:
    return list(spec.alphabet.labels)


def _by_label(labels, values) -> dict:
    return {str(lab): float(v) for lab, v in zip(labels, values)}


def _classification_doc(cls, labels) -> dict:
    return {
        "verdict": cls.verdict,
        "witness": None if cls.witness is None else _by_label(labels, cls.witness),
        "forced_zero": [str(labels[i]) for i in cls.forced_zero],
    }


def _dual_doc(model, nu) -> dict:
    dual = smith_solve(model, nu)
    doc = {"alpha": dual.alpha, "value": dual.value, "status": dual.status,
           "gradient_norm": dual.gradient_norm}
    if dual.converged:
        gap = diagnose_gap(model, nu, dual)
        doc["gap"] = {"gap_present": gap.gap_present, "polar_condition": gap.condition_iv,
                      "extremality_residual": gap.extremality_residual,
                      "passive_scale": gap.passive_scale}
        doc["q_bd"] = _by_label(model.alphabet.labels, gap.q_bd)
    return doc


def _el_doc(model, nu, labels) -> dict:
    el = el_solve(model, nu)
    return {
        "failure": el.failure,
        "active": [str(labels[i]) for i in el.active],
        "p_active": None if el.p_active is None else el.p_active,
        "value": el.value,
    }


def fenchel_check(nu, q) -> dict:
    """Extremality check ``ell(q) + ell*(-y) = 0`` at ``y = (nu^a / q^a - 1, -1^p)``."""
    act, pas = nu.active, nu.passive
    z = np.zeros(nu.m)
    z[act] = -(nu.nu[act] / q[act] - 1.0)
    z[pas] = 1.0
    value = kerridge_inaccuracy(nu, q)
    cc = conjugate(nu, z)
    return {"conjugate_value": cc.value, "mu_hat": cc.mu_hat, "residual": value + cc.value}


def cmd_classify(spec, args) -> dict:
    model = spec.at(args.theta)
    return {"classification": _classification_doc(classify(model, spec.nu), _labels(spec))}


def cmd_solve(spec, args) -> dict:
    model = spec.at(args.theta)
    nu, labels = spec.nu, _labels(spec)
    doc = {"method": args.method,
           "classification": _classification_doc(classify(model, nu), labels)}
    if args.method == "ap":
        res = active_passive_solve(model, nu)
        q, value, converged = res.q, res.value, True
        doc["kappa"] = res.kappa
    else:
        res = pp_solve(model, nu, tol=args.tol)
        q, value, converged = res.q, res.value, res.converged
        doc["trace"] = {"rows": len(res.trace), "last_delta": res.trace[-1].delta}
    doc.update({"q": _by_label(labels, q), "value": value, "converged": converged,
                "residuals": model.residuals(q), "fenchel_check": fenchel_check(nu, q)})
    doc["dual"] = _dual_doc(model, nu)
    doc["el"] = _el_doc(model, nu, labels)
    if not converged:
        doc["error"] = {"type": "ConvergenceError",
                        "message": "perturbation schedule exhausted before the iterates settled"}
        raise SolverFailure(doc)
    return doc


def cmd_dual(spec, args) -> dict:
    doc = _dual_doc(spec.at(args.theta), spec.nu)
    if doc["status"] is not DualStatus.CONVERGED:
        doc["error"] = {"type": "Divergent",
                        "message": "the simplified dual has no finite minimum (H-set or Z-set)"}
        raise SolverFailure(doc)
    return doc


def cmd_conjugate(spec, args) -> dict:
    nu, labels = spec.nu, _labels(spec)
    z = check_vector(_parse_vector(args.z), nu.m, "z")
    cc = conjugate(nu, z)
    return {"z": z, "mu_bar": cc.mu_bar, "mu_hat": cc.mu_hat, "value": cc.value,
            "q_active": _by_label([labels[i] for i in nu.active], cc.q_active),
            "passive_mass": cc.passive_mass,
            "passive_support": [str(labels[i]) for i in cc.passive_support],
            "maximizer": _by_label(labels, cc.maximizer())}


def cmd_el(spec, args) -> dict:
    return {"el": _el_doc(spec.at(args.theta), spec.nu, _labels(spec))}


def cmd_compare(spec, args) -> dict:
    other = load_model(args.other)
    if other.alphabet != spec.alphabet:
        raise ValidationError("--other model uses a different alphabet")
    n = args.n if args.n is not None else spec.nu.n
    if n is None:
        raise ValidationError("compare needs --n when the type is given as frequencies")
    rep = compare(spec.at(args.theta), other.at(args.other_theta), spec.nu, n, tol=args.tol)
    labels = _labels(spec)
    return {
        "n": n,
        "primal": [{"q": _by_label(labels, p.q), "value": p.value} for p in rep.primal],
        "el": [{"failure": e.failure, "p_active": e.p_active, "value": e.value} for e in rep.el],
        "lr": {"ratio": rep.lr.ratio, "log_ratio": rep.lr.log_ratio, "overflow": rep.lr.overflow,
               "evidence": rep.lr_evidence},
        "elr": None if rep.elr is None else {
            "ratio": rep.elr.ratio, "log_ratio": rep.elr.log_ratio, "overflow": rep.elr.overflow,
            "evidence": rep.elr_evidence},
        "discordant": rep.discordant,
    }


def cmd_profile(spec, args) -> dict:
    if not spec.parametrized:
        raise ValidationError("profile needs a parametrized model ('builtin' or 'theta_table')")
    labels = _labels(spec)
    prof = profile_estimating_equations(spec.generator, spec.theta_grid, spec.nu,
                                        labels=spec.alphabet.labels, tol=args.tol)
    rows = [{"theta": r.theta, "primal_value": r.primal_value, "q": _by_label(labels, r.q),
             "el_value": r.el_value, "el_failure": r.el_failure, "gap_present": r.gap_present}
            for r in prof.rows]
    return {"rows": rows, "argmin_primal": prof.argmin_primal, "argmin_el": prof.argmin_el}


def cmd_trace(spec, args) -> dict:
    model = spec.at(args.theta)
    res = pp_solve(model, spec.nu, tol=args.tol, full_schedule=args.full)
    text = trace_csv(res.trace, spec.alphabet.labels)
    out = Path(args.out)
    with open(out, "w", newline="") as fh:
        fh.write(text)
    return {"out": str(out), "rows": len(res.trace), "converged": res.converged,
            "q": _by_label(_labels(spec), res.q), "value": res.value}


def _parse_vector(text: str) -> list:
    text = text.strip()
    try:
        if text.startswith("["):
            return [float(x) for x in json.loads(text)]
        return [float(x) for x in text.split(",") if x.strip()]
    except (ValueError, TypeError):
        raise ValidationError(f"cannot parse vector {text!r}") from None


COMMANDS = {
    "classify": cmd_classify,
    "solve": cmd_solve,
    "dual": cmd_dual,
    "conjugate": cmd_conjugate,
    "el": cmd_el,
    "compare": cmd_compare,
    "profile": cmd_profile,
    "trace": cmd_trace,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="simplex-mle",
                                description="Constrained multinomial maximum likelihood on the simplex.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("model", help="JSON model file")
    common.add_argument("--theta", type=float, help="parameter value for parametrized models")
    common.add_argument("--tol", type=float, default=None,
                        help="path-following tolerance (default: $SIMPLEX_MLE_TOL or 1e-7)")
    common.add_argument("-o", "--output", help="write the document here instead of stdout")
    common.add_argument("--stamp", action="store_true",
                        help="print run metadata to stderr (the document itself is unchanged)")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("classify", parents=[common], help="H-set / Z-set / regular verdict")
    s = sub.add_parser("solve", parents=[common], help="solve the primal problem")
    s.add_argument("--method", choices=("pp", "ap"), default="pp")
    sub.add_parser("dual", parents=[common], help="simplified dual and gap diagnosis")
    c = sub.add_parser("conjugate", parents=[common], help="evaluate the convex conjugate")
    c.add_argument("--z", required=True, help="comma separated or JSON vector")
    sub.add_parser("el", parents=[common], help="empirical likelihood on the observed letters")
    c = sub.add_parser("compare", parents=[common], help="LR and EL ratio of --other against model")
    c.add_argument("--other", required=True, help="second JSON model file")
    c.add_argument("--other-theta", type=float, help="parameter value for the second model")
    c.add_argument("--n", type=int, help="sample size (defaults to the counts total)")
    sub.add_parser("profile", parents=[common], help="profile over the model's theta grid")
    t = sub.add_parser("trace", parents=[common], help="write the perturbation trace as CSV")
    t.add_argument("--out", required=True, help="CSV destination")
    t.add_argument("--full", action="store_true", help="run the whole schedule")
    return p


def _emit(doc: dict, args) -> None:
    text = dumps(doc)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv: Optional[list] = None) -> int:
    """Run one command; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    base = {"command": args.command, "model": args.model}
    if args.theta is not None:
        base["theta"] = args.theta
    try:
        args.tol = default_tolerance() if args.tol is None else check_tolerance(args.tol)
        spec = load_model(args.model)
        doc = {**base, **COMMANDS[args.command](spec, args)}
        code = EXIT_OK
    except SolverFailure as exc:
        doc, code = {**base, **exc.doc}, EXIT_SOLVER
    except InvariantViolation as exc:
        doc, code = {**base, "error": {"type": type(exc).__name__, "message": str(exc)}}, EXIT_INVARIANT
    except (ConvergenceError, InfeasibleError, UnboundedError, DimensionTooLargeError) as exc:
        doc, code = {**base, "error": {"type": type(exc).__name__, "message": str(exc)}}, EXIT_SOLVER
    except (ValidationError, ValueError) as exc:
        doc, code = {**base, "error": {"type": "ValidationError", "message": str(exc)}}, EXIT_VALIDATION
    except SimplexMLEError as exc:
        doc, code = {**base, "error": {"type": type(exc).__name__, "message": str(exc)}}, EXIT_INVARIANT
    _emit(doc, args)
    if args.stamp:
        meta = {"version": __version__, "exit_code": code,
                "time": datetime.now(timezone.utc).isoformat(timespec="seconds")}
        sys.stderr.write(json.dumps(meta, sort_keys=True) + "\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

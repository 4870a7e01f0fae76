"""Simplified (Smith / El Barmi-Dykstra) dual and its repairs.

The simplified dual of the constrained multinomial MLE fixes the
normalizing multiplier at one and minimizes

    alpha -> I_1(nu^a || sum_h alpha_h u_h^a) = <nu^a, log nu^a / (1 + y^a)>

over ``alpha`` (free on equality rows, ``alpha_h >= 0`` on inequality rows).
It is finite exactly when the feasible set is regular with respect to the
type, and even then it can miss the primal optimum when that optimum puts
mass on unobserved letters.  :func:`diagnose_gap` detects that case,
:func:`fenchel_single_inequality` gives the exact answer for one inequality
row and :func:`active_passive_solve` repairs it by optimizing over the
passive mass explicitly.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq, minimize

from .conjugate import conjugate
from .core import TypeVector, as_type_vector, kerridge_inaccuracy
from .exceptions import (
    ConvergenceError,
    DimensionTooLargeError,
    InfeasibleError,
    InvariantViolation,
    UnboundedError,
    ValidationError,
)
from .geometry import (
    ConstraintModel,
    RowKind,
    Verdict,
    classify,
    passive_projection_hull,
    polar_cone_membership,
    support_check,
)
from .lp import lp_solve

LD = np.longdouble

#: Objective floor and coefficient ceiling that signal an unbounded dual.
DIVERGENCE_FLOOR = -1e8
DIVERGENCE_COEF = 1e12
ARMIJO_C = 1e-4
STALL_GTOL = 1e-10
FULL_STEP_DECREMENT = 1e-14
STALL_ITERATIONS = 5


class DualStatus(str, enum.Enum):
    CONVERGED = "converged"
    DIVERGENT = "divergent"


@dataclass(frozen=True)
class DualSolution:
    """Result of :func:`smith_solve`.

    ``q_active = nu^a / (1 + y_active)`` is evaluated in extended precision
    because ``1 + y`` can be tiny along a perturbation path.
    """

    alpha: np.ndarray
    y_active: np.ndarray
    value: float
    status: DualStatus
    q_active: Optional[np.ndarray] = None
    gradient_norm: float = math.nan
    iterations: int = 0

    @property
    def converged(self) -> bool:
        return self.status is DualStatus.CONVERGED


def _row_space(D: np.ndarray):
    """Orthonormal basis of the row space of ``D`` plus the map back to row coefficients."""
    U, S, Vt = np.linalg.svd(D, full_matrices=False)
    k = int(np.sum(S > 1e-10 * max(S.max(initial=0.0), 1.0)))
    return Vt[:k], U[:, :k] / S[:k]


def _newton(G: np.ndarray, bounded: np.ndarray, w: np.ndarray, theta0: np.ndarray,
            gtol: float, max_iter: int):
    """Projected damped Newton for ``min -<w, log(1 + G.T @ theta)>`` subject to ``theta[bounded] >= 0``.

    Iterates live in extended precision; the Newton systems are solved in
    double precision, which acts as iterative refinement.
    """
    Gl = G.astype(LD)
    wl = w.astype(LD)
    const = np.sum(wl * np.log(wl))

    def objective(th):
        den = 1 + Gl.T @ th
        if np.any(den <= 0):
            return None, None
        return const - np.sum(wl * np.log(den)), den

    theta = theta0.astype(LD)
    theta[bounded] = np.maximum(theta[bounded], 0)
    f, den = objective(theta)
    if f is None:
        theta = np.zeros(G.shape[0], dtype=LD)
        f, den = objective(theta)
    pg_norm = best_pg = math.inf
    stale = 0
    for it in range(1, max_iter + 1):
        q = wl / den
        g = -(Gl @ q)
        pg = g.copy()
        at_bound = bounded & (theta <= 0)
        pg[at_bound] = np.minimum(g[at_bound], 0)
        pg_norm = float(np.max(np.abs(pg), initial=0.0))
        # the gradient also fades along a recession ray, so test divergence first
        if f < DIVERGENCE_FLOOR or float(np.max(np.abs(theta))) > DIVERGENCE_COEF:
            return theta, f, den, DualStatus.DIVERGENT, pg_norm, it
        if pg_norm <= gtol:
            return theta, f, den, DualStatus.CONVERGED, pg_norm, it

        free = ~at_bound | (g < 0)
        h = (q * q / wl).astype(float)
        H = (G[free] * h) @ G[free].T
        step = np.zeros(G.shape[0], dtype=LD)
        step[free] = np.linalg.lstsq(H, -g[free].astype(float), rcond=None)[0]
        decrement = float(-(g @ step))

        # a feasible direction that never shrinks any 1 + y is a recession direction
        move = (G.T @ step.astype(float))
        scale = float(np.max(np.abs(move), initial=0.0))
        if decrement > 1e-8 and scale > 0 and move.min() >= -1e-12 * scale and not np.any(step[at_bound] < 0):
            return theta, f, den, DualStatus.DIVERGENT, pg_norm, it

        s = LD(1)
        accepted = False
        while s > 1e-30:
            cand = theta + s * step
            cand[bounded] = np.maximum(cand[bounded], 0)
            fc, dc = objective(cand)
            if fc is not None:
                # near the optimum the Armijo test drowns in roundoff; take the full step
                if decrement < FULL_STEP_DECREMENT or fc <= f + ARMIJO_C * (g @ (cand - theta)):
                    accepted = True
                    break
            s /= 2
        if not accepted:
            break
        theta, f, den = cand, fc, dc
        if pg_norm < best_pg:
            best_pg, stale = pg_norm, 0
        else:
            stale += 1
            if stale >= STALL_ITERATIONS:
                break
    # stalled at the precision floor: accept if still within the documented bound
    if pg_norm <= max(gtol, STALL_GTOL):
        return theta, f, den, DualStatus.CONVERGED, pg_norm, it
    raise ConvergenceError(f"dual Newton stalled with projected gradient {pg_norm:.3g}")


def smith_solve(model: ConstraintModel, nu, alpha0=None, gtol: float = 1e-12,
                max_iter: int = 500) -> DualSolution:
    """Minimize the simplified dual ``alpha -> I_1(nu^a || sum_h alpha_h u_h^a)``.

    Projected damped Newton with backtracking that keeps ``1 + y^a > 0``.
    With linearly dependent rows the minimum-norm ``alpha`` is reported.
    The iteration is declared divergent when the objective drops below
    ``-1e8`` or ``|alpha|`` exceeds ``1e12``; by construction this happens
    for H-sets and Z-sets.

    Parameters
    ----------
    model : ConstraintModel
    nu : TypeVector or array_like
    alpha0 : array_like, optional
        Warm start (one coefficient per row).
    gtol : float
        Sup-norm bound on the projected gradient at convergence.
    """
    nu = as_type_vector(nu)
    if nu.m != model.m:
        raise ValidationError("type vector and model have different alphabet sizes")
    act = nu.active
    w = nu.nu[act]
    D = model.directions[:, act]
    ineq = model.inequality_mask
    r = model.r
    alpha0 = np.zeros(r) if alpha0 is None else np.asarray(alpha0, dtype=float)

    if r == 0:
        value = float(np.sum(w * np.log(w)))
        return DualSolution(np.zeros(0), np.zeros(act.size), value, DualStatus.CONVERGED,
                            w.copy(), 0.0, 0)

    if not ineq.any():
        basis, back = _row_space(D)
        if basis.shape[0] == 0:
            # rows vanish on the active letters: the dual is constant
            value = float(np.sum(w * np.log(w)))
            return DualSolution(np.zeros(r), np.zeros(act.size), value, DualStatus.CONVERGED,
                                w.copy(), 0.0, 0)
        theta0 = basis @ (D.T @ alpha0)
        theta, f, den, status, pg, it = _newton(basis, np.zeros(basis.shape[0], bool), w,
                                                theta0, gtol, max_iter)
        alpha = back @ theta.astype(float)
        y = (basis.T.astype(LD) @ theta).astype(float)
    else:
        theta, f, den, status, pg, it = _newton(D, ineq.copy(), w, alpha0, gtol, max_iter)
        alpha = theta.astype(float)
        y = (D.T.astype(LD) @ theta).astype(float)
    q = (w.astype(LD) / den).astype(float)
    return DualSolution(alpha, y, float(f), status, q, pg, it)


def primal_from_dual(nu, dual: DualSolution, model: Optional[ConstraintModel] = None,
                     tol: float = 1e-8) -> np.ndarray:
    """``(nu^a / (1 + y^a), 0^p)``; checked against ``model`` when one is given."""
    nu = as_type_vector(nu)
    if not dual.converged:
        raise ValidationError("cannot build a primal point from a divergent dual")
    q = np.zeros(nu.m)
    q[nu.active] = dual.q_active if dual.q_active is not None else nu.nu[nu.active] / (1 + dual.y_active)
    if model is not None:
        res = model.residuals(q)
        if res.max() > tol:
            raise InvariantViolation(f"dual-derived point violates C by {res.max():.3g}")
    return q


@dataclass(frozen=True)
class GapDiagnosis:
    gap_present: bool
    condition_iv: bool
    extremality_residual: float
    q_bd: np.ndarray
    passive_scale: float


def _passive_scale(model: ConstraintModel, nu: TypeVector, y_active) -> float:
    """Smallest ``s`` with ``(y^a, -s 1^p)`` in the polar cone of ``C``.

    Equals ``max <y^a, q^a> / sum(q^p)`` over ``q in C`` with ``q^p != 0``,
    solved as a linear program after the Charnes-Cooper substitution.
    ``-inf`` when no member of ``C`` charges a passive letter.
    """
    act, pas = nu.active, nu.passive
    if pas.size == 0:
        return -math.inf
    D = model.directions
    ineq = model.inequality_mask
    c = np.zeros(model.m)
    c[act] = y_active
    sel = np.zeros(model.m)
    sel[pas] = 1.0
    A_eq = np.vstack([sel, D[~ineq]])
    b_eq = np.concatenate([[1.0], np.zeros(int((~ineq).sum()))])
    try:
        return lp_solve(c, D[ineq], np.zeros(int(ineq.sum())), A_eq, b_eq).value
    except InfeasibleError:
        return -math.inf
    except UnboundedError:
        return math.inf


def diagnose_gap(model: ConstraintModel, nu, dual: DualSolution, tol: float = 1e-9) -> GapDiagnosis:
    """Decide whether the simplified dual reaches minus the primal optimum.

    No gap iff ``(y^a, -1^p)`` is in the polar cone of ``C``.  The extremality
    residual ``ell(q_bd) + ell*(-y)`` is evaluated at the element of the dual
    solution set that makes it smallest, ``y = (y^a, -s 1^p)`` with ``s`` from
    :func:`_passive_scale`; it vanishes exactly when there is no gap.
    """
    nu = as_type_vector(nu)
    q_bd = primal_from_dual(nu, dual)
    act, pas = nu.active, nu.passive
    y = np.zeros(nu.m)
    y[act] = dual.y_active
    y[pas] = -1.0
    cond_iv = polar_cone_membership(model, y, tol=tol)
    s = _passive_scale(model, nu, dual.y_active)
    z = np.zeros(nu.m)
    z[act] = -dual.y_active
    z[pas] = s
    if math.isinf(s) and s > 0:
        resid = math.inf
    else:
        resid = kerridge_inaccuracy(nu, q_bd) + conjugate(nu, z).value
    return GapDiagnosis(not cond_iv, cond_iv, resid, q_bd, s)


@dataclass(frozen=True)
class SingleInequalityResult:
    alpha: float
    q_active: np.ndarray
    case: str
    q: np.ndarray
    value: float


def fenchel_single_inequality(u, rhs: float, nu) -> SingleInequalityResult:
    """Closed-form primal solution for ``C = {q : <q, u> <= rhs}``.

    Case ``"B"`` (some mass must go to unobserved letters) holds iff
    ``min(u^p) < 0`` and ``sum nu^a / (1 - u^a / min(u^p)) < 1``; then the
    dual coefficient is ``-1 / min(u^p)`` and the leftover mass sits on the
    passive letters minimizing ``u``.  Otherwise (case ``"A"``) the simplified
    dual already solves the problem.
    """
    nu = as_type_vector(nu)
    u = np.asarray(u, dtype=float) - float(rhs)
    if u.size != nu.m:
        raise ValidationError("u must have one entry per letter")
    act, pas = nu.active, nu.passive
    w = nu.nu[act]
    if pas.size and u[pas].min() < 0:
        umin = u[pas].min()
        den = 1.0 - u[act] / umin
        if np.all(den > 0) and np.sum(w / den) < 1.0:
            qa = w / den
            q = np.zeros(nu.m)
            q[act] = qa
            ties = pas[np.abs(u[pas] - umin) <= 1e-12]
            q[ties] = (1.0 - qa.sum()) / ties.size
            return SingleInequalityResult(-1.0 / umin, qa, "B", q, kerridge_inaccuracy(nu, q))
    model = ConstraintModel.from_arrays(u[None, :], kinds=[RowKind.LE])
    dual = smith_solve(model, nu)
    if not dual.converged:
        raise InvariantViolation("simplified dual diverged outside the closed-form case")
    q = primal_from_dual(nu, dual)
    return SingleInequalityResult(float(dual.alpha[0]), dual.q_active, "A", q, kerridge_inaccuracy(nu, q))


def klotz_candidate(u, nu) -> np.ndarray:
    """The classical single-inequality candidate ``nu / (1 + alpha u)`` with ``alpha`` in ``(0, -1/min(u^a))``.

    It ignores unobserved letters and is therefore not always optimal; kept
    for comparison only.
    """
    nu = as_type_vector(nu)
    u = np.asarray(u, dtype=float)
    act = nu.active
    ua, w = u[act], nu.nu[act]
    if not (nu.nu @ u > 0 and ua.min() < 0):
        raise ValidationError("the classical candidate needs <nu, u> > 0 and min(u^a) < 0")
    right = -1.0 / ua.min()

    def f(a):
        return float(np.sum(w / (1.0 + a * ua))) - 1.0

    lo = right * 1e-6
    while f(lo) >= 0:
        lo *= 1e-3
    alpha = brentq(f, lo, right * (1 - 1e-12), xtol=1e-15)
    q = np.zeros(nu.m)
    q[act] = w / (1.0 + alpha * ua)
    return q


@dataclass(frozen=True)
class APResult:
    """Active-passive solution: passive mass, its scale ``kappa`` and the active dual."""

    q_passive: np.ndarray
    kappa: float
    y_active: np.ndarray
    alpha: np.ndarray
    q: np.ndarray
    value: float


def _ap_inner(model: ConstraintModel, nu: TypeVector, qp: np.ndarray):
    """Minimum of the inaccuracy over the active slice at passive mass ``qp`` (``inf`` if unsupported)."""
    if np.any(qp < -1e-12):
        return math.inf, None
    qp = np.clip(qp, 0.0, None)
    s = qp.sum()
    if s >= 1.0 - 1e-14:
        return math.inf, None
    kappa = 1.0 / (1.0 - s)
    act, pas = nu.active, nu.passive
    D = model.directions
    V = D[:, act] + kappa * (D[:, pas] @ qp)[:, None]
    if model.r:
        inner = ConstraintModel.from_arrays(V, kinds=[row.kind for row in model.rows])
    else:
        inner = ConstraintModel.from_arrays(np.zeros((0, act.size)), labels=range(act.size))
    nu_a = TypeVector(nu.nu[act] / nu.nu[act].sum())
    if inner.r and classify(inner, nu_a).verdict is not Verdict.REGULAR:
        return math.inf, None
    dual = smith_solve(inner, nu_a)
    if not dual.converged:
        return math.inf, None
    return -dual.value + math.log(kappa), (kappa, dual, qp)


def _golden(f, a: float, b: float, t_finite: float, tol: float):
    invphi = (math.sqrt(5) - 1) / 2
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    best = (f(t_finite), t_finite)
    while b - a > tol:
        best = min(best, (fc, c), (fd, d))
        if math.isinf(fc) and math.isinf(fd):
            if t_finite > d:
                a = c
            elif t_finite < c:
                b = d
            else:
                a, b = c, d
            c, d = b - invphi * (b - a), a + invphi * (b - a)
            fc, fd = f(c), f(d)
        elif fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    mid = 0.5 * (a + b)
    return min(best, (f(mid), mid))[1]


def active_passive_solve(model: ConstraintModel, nu, max_free_dim: int = 3,
                         tol: float = 1e-9) -> APResult:
    """Solve the primal by optimizing the passive mass explicitly.

    For fixed passive coordinates ``q^p`` the active problem is solved through
    its simplified dual on the rescaled slice (``kappa = 1 / (1 - sum q^p)``);
    the outer problem over ``q^p`` runs on the affine hull of the passive
    projection of ``C``: golden-section search in one dimension, Nelder-Mead
    with one restart in two or three.

    Raises
    ------
    DimensionTooLargeError
        If the passive projection has more than ``max_free_dim`` free dimensions.
    """
    nu = as_type_vector(nu)
    act, pas = nu.active, nu.passive
    if pas.size == 0:
        dual = smith_solve(model, nu)
        if not dual.converged:
            raise InvariantViolation("simplified dual diverged for a fully observed type")
        q = primal_from_dual(nu, dual)
        return APResult(np.zeros(0), 1.0, dual.y_active, dual.alpha, q, kerridge_inaccuracy(nu, q))

    points, basis = passive_projection_hull(model, nu)
    d = basis.shape[1]
    if d > max_free_dim:
        raise DimensionTooLargeError(f"passive projection has {d} free dimensions (limit {max_free_dim})")
    center = support_check(model).witness[pas]

    def outer(t):
        return _ap_inner(model, nu, center + basis @ np.atleast_1d(t))[0]

    if d == 0:
        t_best = np.zeros(0)
    elif d == 1:
        A_ub, b_ub, A_eq, b_eq = model.lp_rows()
        c = np.zeros(model.m)
        c[pas] = basis[:, 0]
        ref = basis[:, 0] @ center
        hi = lp_solve(c, A_ub, b_ub, A_eq, b_eq).value - ref
        lo = lp_solve(c, A_ub, b_ub, A_eq, b_eq, maximize=False).value - ref
        t_best = np.array([_golden(lambda t: outer(t), lo, hi, 0.0, tol)])
    else:
        full = d == pas.size

        def to_passive(t):
            # on a full-dimensional projection the orthant faces are folded
            # away by reflection, which Nelder-Mead handles far better than a penalty
            return np.abs(t) if full else center + basis @ t

        def penalized(t):
            v = _ap_inner(model, nu, to_passive(t))[0]
            return 1e10 if math.isinf(v) else v

        x0 = center if full else np.zeros(d)
        opts = {"xatol": tol, "fatol": 1e-14, "maxiter": 20000, "adaptive": True}
        if not full:
            opts["initial_simplex"] = (0.5 * (points - center) @ basis)[: d + 1]
        res = minimize(penalized, x0, method="Nelder-Mead", options=opts)
        opts.pop("initial_simplex", None)
        res = minimize(penalized, res.x, method="Nelder-Mead", options=opts)
        qp_best = to_passive(res.x)
        t_best = basis.T @ (qp_best - center)

    value, payload = _ap_inner(model, nu, center + basis @ t_best)
    if payload is None:
        raise ConvergenceError("active-passive outer search ended outside the finite region")
    kappa, dual, qp = payload
    qa = dual.q_active / kappa
    q = np.zeros(nu.m)
    q[act] = qa
    q[pas] = qp
    y = nu.nu[act] / qa - kappa
    return APResult(qp, kappa, y, kappa * dual.alpha, q, kerridge_inaccuracy(nu, q))

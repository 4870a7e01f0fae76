"""Perturbed-primal (PP) path following.

Unobserved letters are activated with a small weight ``delta``, which makes
the type strictly positive.  The simplified dual of every perturbed problem
is then well posed, and ``q_hat(delta) = nu(delta) / (1 + y_hat(delta))``
converges to a solution of the original primal as ``delta -> 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import TypeVector, as_type_vector, kerridge_inaccuracy
from .duals import smith_solve
from .exceptions import InvariantViolation, ValidationError
from .geometry import ConstraintModel, require_full_support

DEFAULT_DELTAS = tuple(10.0 ** -j for j in range(1, 10))
#: No schedule may go below this; roundoff dominates the dual beyond it.
DELTA_FLOOR = 1e-12
DEFAULT_TOL = 1e-7
#: Order reported for a residual that is exactly zero.
GAMMA_CAP = 16


@dataclass(frozen=True)
class PerturbationSchedule:
    """Decreasing activation levels plus per-passive-letter weights.

    ``weights=None`` is uniform activation.  Custom weights are constants, one
    per passive letter in index order; weights that vary with ``delta`` are not
    accepted because they can make the path diverge.
    """

    deltas: tuple = DEFAULT_DELTAS
    weights: Optional[tuple] = None

    def __post_init__(self):
        if callable(self.weights):
            raise ValidationError("activation weights must be constants, not functions of delta")
        d = tuple(float(x) for x in self.deltas)
        if not d:
            raise ValidationError("schedule needs at least one delta")
        if any(not math.isfinite(x) or x <= 0 for x in d):
            raise ValidationError("deltas must be positive and finite")
        if any(b >= a for a, b in zip(d, d[1:])):
            raise ValidationError("deltas must be strictly decreasing")
        if d[-1] < DELTA_FLOOR:
            raise ValidationError(f"deltas below {DELTA_FLOOR:g} are not supported")
        object.__setattr__(self, "deltas", d)
        if self.weights is not None:
            w = tuple(float(x) for x in np.ravel(self.weights))
            if any(not math.isfinite(x) or x <= 0 for x in w):
                raise ValidationError("activation weights must be positive and finite")
            object.__setattr__(self, "weights", w)

    @classmethod
    def geometric(cls, first: int = 1, last: int = 9, weights=None) -> "PerturbationSchedule":
        """``10^-first, ..., 10^-last``."""
        return cls(tuple(10.0 ** -j for j in range(first, last + 1)), weights)


def perturb_type(nu, delta: float, schedule: Optional[PerturbationSchedule] = None) -> TypeVector:
    """``nu(delta) = (nu + delta * w) / (1 + delta * sum(w))`` with ``w`` supported on passive letters."""
    nu = as_type_vector(nu)
    if not delta > 0:
        raise ValidationError("delta must be positive")
    pas = nu.passive
    if pas.size == 0:
        return nu
    w = np.ones(pas.size)
    if schedule is not None and schedule.weights is not None:
        if len(schedule.weights) != pas.size:
            raise ValidationError(
                f"schedule has {len(schedule.weights)} weights for {pas.size} passive letters"
            )
        w = np.asarray(schedule.weights)
    out = nu.nu.copy()
    out[pas] += delta * w
    out /= 1.0 + delta * w.sum()
    # renormalize the last bit of roundoff so the sum test at 1e-12 holds
    out /= out.sum()
    return TypeVector(out, n=nu.n)


def residual_orders(res) -> np.ndarray:
    """Orders ``gamma`` with ``res ~ 10^-gamma`` (floor of ``-log10``), capped at 16."""
    res = np.asarray(res, dtype=float)
    with np.errstate(divide="ignore"):
        g = np.floor(-np.log10(res))
    return np.clip(np.where(res > 0, g, GAMMA_CAP), -GAMMA_CAP, GAMMA_CAP).astype(int)


def residuals(model: ConstraintModel, q) -> tuple[np.ndarray, np.ndarray]:
    """Row residuals of ``q`` followed by ``|sum(q) - 1|``, and their orders."""
    res = model.residuals(q)
    return res, residual_orders(res)


@dataclass(frozen=True)
class PPTraceRow:
    delta: float
    nu_delta: np.ndarray
    alpha: np.ndarray
    q_hat: np.ndarray
    neg_dual_value: float
    residuals: np.ndarray
    gamma: np.ndarray
    iterations: int


@dataclass(frozen=True)
class PPTrace:
    rows: tuple = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __getitem__(self, k):
        return self.rows[k]

    def at(self, delta: float, rtol: float = 1e-9) -> PPTraceRow:
        """The row whose ``delta`` matches to relative tolerance ``rtol``."""
        for row in self.rows:
            if abs(row.delta - delta) <= rtol * delta:
                return row
        raise KeyError(delta)

    @property
    def deltas(self) -> np.ndarray:
        return np.array([r.delta for r in self.rows])

    @property
    def q_hat(self) -> np.ndarray:
        return np.vstack([r.q_hat for r in self.rows])

    @property
    def alpha(self) -> np.ndarray:
        return np.vstack([r.alpha for r in self.rows])


@dataclass(frozen=True)
class PPResult:
    q: np.ndarray
    value: float
    trace: PPTrace
    converged: bool


def pp_solve(model: ConstraintModel, nu, schedule: Optional[PerturbationSchedule] = None,
             tol: float = DEFAULT_TOL, full_schedule: bool = False,
             warm_start: bool = True) -> PPResult:
    """Solve the primal problem by following the perturbed solutions ``q_hat(delta)``.

    Parameters
    ----------
    model : ConstraintModel
        Feasible set; must contain a distribution of full support.
    nu : TypeVector or array_like
    schedule : PerturbationSchedule, optional
        Defaults to uniform activation at ``10^-1, ..., 10^-9``.
    tol : float
        Stop at the first ``delta`` where ``q_hat`` moved less than ``tol`` in
        sup norm and every residual is below ``tol``.
    full_schedule : bool
        Keep going to the end of the schedule even after the stopping test
        passes; the reported solution is still the final iterate.
    warm_start : bool
        Start each dual solve from the previous coefficients.

    Returns
    -------
    PPResult
        ``converged`` is False when the schedule ran out first; the trace is
        complete in either case.
    """
    nu = as_type_vector(nu)
    if nu.m != model.m:
        raise ValidationError("type vector and model have different alphabet sizes")
    require_full_support(model)
    schedule = schedule or PerturbationSchedule()
    deltas = schedule.deltas if nu.m_p else schedule.deltas[:1]

    rows = []
    alpha = None
    converged = False
    for delta in deltas:
        nu_d = perturb_type(nu, delta, schedule)
        dual = smith_solve(model, nu_d, alpha0=alpha if warm_start else None)
        if not dual.converged:
            raise InvariantViolation(f"simplified dual diverged for the perturbed type at delta={delta:g}")
        alpha = dual.alpha
        # every letter is active for a perturbed type
        q = np.zeros(nu.m)
        q[nu_d.active] = dual.q_active
        res, gamma = residuals(model, q)
        rows.append(PPTraceRow(delta, nu_d.nu, dual.alpha, q, -dual.value, res, gamma, dual.iterations))
        if not converged:
            if nu.m_p == 0:
                converged = True
            elif len(rows) > 1:
                step = float(np.max(np.abs(q - rows[-2].q_hat)))
                converged = step < tol and float(res.max()) < tol
            if converged and not full_schedule:
                break
    q = rows[-1].q_hat
    return PPResult(q, kerridge_inaccuracy(nu, q), PPTrace(tuple(rows)), converged)


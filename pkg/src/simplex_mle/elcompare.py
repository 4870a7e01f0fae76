"""Empirical likelihood on the observed letters and its comparison with the multinomial MLE.

Empirical likelihood (EL) solves the primal problem with every unobserved
letter pinned to zero.  When the optimal multinomial distribution charges an
unobserved letter the two answers differ, and likelihood ratios built from
them can point in opposite directions.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence, Union

import numpy as np

from .core import LikelihoodRatio, TypeVector, as_type_vector, kerridge_inaccuracy, likelihood_ratio
from .duals import diagnose_gap, smith_solve
from .exceptions import ValidationError
from .geometry import Classification, ConstraintModel, Verdict, classify
from .pp import PerturbationSchedule, PPResult, pp_solve


class ELFailure(str, enum.Enum):
    CONVEX_HULL = "convex-hull"
    ZERO_LIKELIHOOD = "zero-likelihood"


_FAILURE_OF = {Verdict.HSET: ELFailure.CONVEX_HULL, Verdict.ZSET: ELFailure.ZERO_LIKELIHOOD}


@dataclass(frozen=True)
class ELSolution:
    """EL optimum on the active letters only; ``p_active`` is None when EL fails."""

    p_active: Optional[np.ndarray]
    value: float
    failure: Optional[ELFailure]
    active: np.ndarray

    @property
    def ok(self) -> bool:
        return self.failure is None

    def padded(self, m: int) -> np.ndarray:
        """The EL distribution on the full alphabet, zero on unobserved letters."""
        if self.p_active is None:
            raise ValidationError(f"EL failed ({self.failure.value}); nothing to pad")
        return pad_active(self.p_active, self.active, m)


def pad_active(p_active, active, m: int) -> np.ndarray:
    q = np.zeros(m)
    q[np.asarray(active, dtype=int)] = p_active
    return q


def el_solve(model: ConstraintModel, nu) -> ELSolution:
    """Maximize the multinomial likelihood over ``C`` restricted to the observed letters.

    The restricted problem has a fully observed type, so its simplified dual
    is exact whenever it is finite.  A divergent dual is reported as a
    convex-hull failure (H-set) or a zero-likelihood failure (Z-set).
    """
    nu = as_type_vector(nu)
    if nu.m != model.m:
        raise ValidationError("type vector and model have different alphabet sizes")
    act = nu.active
    verdict = classify(model, nu).verdict
    if verdict is not Verdict.REGULAR:
        return ELSolution(None, math.inf, _FAILURE_OF[verdict], act)
    nu_a = TypeVector(nu.nu[act] / nu.nu[act].sum())
    dual = smith_solve(model.restricted(act), nu_a)
    if not dual.converged:
        # classification and the dual disagree only on numerically borderline models
        return ELSolution(None, math.inf, ELFailure.ZERO_LIKELIHOOD, act)
    p = dual.q_active / dual.q_active.sum()
    return ELSolution(p, kerridge_inaccuracy(nu_a, p), None, act)


#: Jeffreys' evidence bands in log10 of the ratio.
EVIDENCE_BANDS = (
    (0.5, "barely worth mentioning"),
    (1.0, "substantial"),
    (1.5, "strong"),
    (2.0, "very strong"),
    (math.inf, "decisive"),
)


def evidence_grade(log_ratio: float) -> str:
    """Jeffreys' verbal grade of a likelihood ratio, prefixed by the favoured model."""
    l10 = log_ratio / math.log(10)
    side = "model 2" if l10 >= 0 else "model 1"
    for edge, label in EVIDENCE_BANDS:
        if abs(l10) < edge:
            return f"{label} for {side}"
    return f"decisive for {side}"


@dataclass(frozen=True)
class ComparisonReport:
    """Primal and EL solutions of both models and the two likelihood ratios.

    ``discordant`` is set when EL fails for a model or the two ratios land in
    different evidence grades, which includes pointing at different models.
    """

    primal: tuple
    el: tuple
    lr: LikelihoodRatio
    elr: Optional[LikelihoodRatio]
    discordant: bool

    @property
    def sign_discordant(self) -> bool:
        return self.elr is None or _sign(self.lr.log_ratio) != _sign(self.elr.log_ratio)

    @property
    def lr_evidence(self) -> str:
        return evidence_grade(self.lr.log_ratio)

    @property
    def elr_evidence(self) -> Optional[str]:
        return None if self.elr is None else evidence_grade(self.elr.log_ratio)


def compare(model_1: ConstraintModel, model_2: ConstraintModel, nu, n: Optional[int] = None,
            schedule: Optional[PerturbationSchedule] = None, tol: float = 1e-7) -> ComparisonReport:
    """Likelihood ratio of model 2 against model 1, from the MLE and from EL.

    ``n`` defaults to the sample size stored on ``nu``.  ``elr`` is None when
    EL fails for either model.
    """
    nu = as_type_vector(nu)
    if model_1.alphabet != model_2.alphabet:
        raise ValidationError("models are defined over different alphabets")
    n = nu.n if n is None else int(n)
    if n is None or n < 1:
        raise ValidationError("a positive sample size n is required")
    primal = tuple(pp_solve(m, nu, schedule=schedule, tol=tol) for m in (model_1, model_2))
    el = tuple(el_solve(m, nu) for m in (model_1, model_2))
    lr = likelihood_ratio(n, primal[0].value, primal[1].value)
    elr = None
    discordant = True
    if el[0].ok and el[1].ok:
        elr = likelihood_ratio(n, el[0].value, el[1].value)
        discordant = (_sign(lr.log_ratio) != _sign(elr.log_ratio)
                      or evidence_grade(lr.log_ratio) != evidence_grade(elr.log_ratio))
    return ComparisonReport(primal, el, lr, elr, discordant)


def _sign(x: float, tol: float = 1e-12) -> int:
    return 0 if abs(x) <= tol else (1 if x > 0 else -1)


ThetaGenerator = Callable[[float], Union[np.ndarray, ConstraintModel]]


def qin_lawless(x) -> ThetaGenerator:
    """Mean and variance pair ``u_1 = x - theta``, ``u_2 = x^2 - 2 theta^2 - 1``."""
    x = np.asarray(x, dtype=float)
    return lambda theta: np.vstack([x - theta, x**2 - 2 * theta**2 - 1])


def second_moment(x) -> ThetaGenerator:
    """Single second-moment row ``u = x^2 - theta``."""
    x = np.asarray(x, dtype=float)
    return lambda theta: (x**2 - theta)[None, :]


BUILTIN_GENERATORS = {"qin-lawless": qin_lawless, "second-moment": second_moment}


def model_at(generator: ThetaGenerator, theta: float, labels: Optional[Sequence] = None) -> ConstraintModel:
    """Evaluate a generator; bare arrays are read as equality rows with zero right-hand side."""
    out = generator(theta)
    if isinstance(out, ConstraintModel):
        return out
    U = np.atleast_2d(np.asarray(out, dtype=float))
    return ConstraintModel.from_arrays(U, labels=labels)


@dataclass(frozen=True)
class ThetaRow:
    theta: float
    primal_value: float
    q: np.ndarray
    el_value: float
    el_failure: Optional[ELFailure]
    gap_present: Optional[bool]


@dataclass(frozen=True)
class ThetaProfile:
    rows: tuple
    argmin_primal: float
    argmin_el: Optional[float]


def profile_estimating_equations(generator: ThetaGenerator, theta_grid, nu,
                                 labels: Optional[Sequence] = None,
                                 schedule: Optional[PerturbationSchedule] = None,
                                 tol: float = 1e-7) -> ThetaProfile:
    """Profile the MLE and EL values over a grid of parameter values.

    ``gap_present`` is None when the simplified dual diverges (H-set or Z-set).
    ``argmin_el`` is None when EL fails at every grid point.
    """
    nu = as_type_vector(nu)
    grid = [float(t) for t in np.atleast_1d(theta_grid)]
    if not grid:
        raise ValidationError("theta grid is empty")
    rows = []
    for theta in grid:
        model = model_at(generator, theta, labels)
        if model.m != nu.m:
            raise ValidationError(f"generator returned rows of length {model.m}, type has {nu.m}")
        pp = pp_solve(model, nu, schedule=schedule, tol=tol)
        el = el_solve(model, nu)
        dual = smith_solve(model, nu)
        gap = diagnose_gap(model, nu, dual).gap_present if dual.converged else None
        rows.append(ThetaRow(theta, pp.value, pp.q, el.value, el.failure, gap))
    argmin_primal = min(rows, key=lambda r: r.primal_value).theta
    ok = [r for r in rows if r.el_failure is None]
    argmin_el = min(ok, key=lambda r: r.el_value).theta if ok else None
    return ThetaProfile(tuple(rows), argmin_primal, argmin_el)


class MDIReport(NamedTuple):
    classification: Classification
    pp_result: PPResult

    @property
    def mdi_exists(self) -> bool:
        """The minimum discrimination information projection needs a solution on the observed letters."""
        return self.classification.verdict is Verdict.REGULAR


def mdi_diagnose(model: ConstraintModel, nu, schedule: Optional[PerturbationSchedule] = None,
                 tol: float = 1e-7) -> MDIReport:
    """Classify ``C`` against ``nu`` and solve the multinomial problem regardless.

    The discrimination-information projection of ``nu`` onto ``C`` only charges
    observed letters, so it does not exist for H-sets and Z-sets, while the
    likelihood maximizer always does.
    """
    nu = as_type_vector(nu)
    return MDIReport(classify(model, nu), pp_solve(model, nu, schedule=schedule, tol=tol))

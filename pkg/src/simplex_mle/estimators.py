"""Scikit-learn style estimators around the solvers.

``fit`` takes a 1-D sequence of observed labels; the fitted distribution is
exposed as ``probabilities_`` over the alphabet.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, DensityMixin
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_is_fitted

from .core import TypeVector, as_type_vector
from .duals import active_passive_solve
from .elcompare import el_solve
from .exceptions import ValidationError
from .geometry import classify
from .pp import PerturbationSchedule, pp_solve
from .validation import (
    check_alphabet,
    check_constraints,
    check_tolerance,
    default_tolerance,
    label_indices,
    type_from_labels,
)

_METHODS = ("pp", "ap")


class _SimplexDensity(DensityMixin, BaseEstimator):
    """Shared scoring and sampling for fitted distributions on a finite alphabet."""

    def _setup(self):
        self.alphabet_ = check_alphabet(self.alphabet)
        self.model_ = check_constraints(self.constraints, self.alphabet_)

    def fit_type(self, nu):
        """Fit from a type vector (relative frequencies) instead of raw labels."""
        self._setup()
        nu = as_type_vector(nu)
        if nu.m != self.alphabet_.m:
            raise ValidationError(f"type has {nu.m} entries, alphabet has {self.alphabet_.m}")
        return self._fit_type(nu)

    def fit(self, X, y=None, sample_weight=None):
        """Fit to observed labels ``X``; ``y`` is ignored."""
        self._setup()
        return self._fit_type(type_from_labels(X, self.alphabet_, sample_weight))

    def predict_proba(self, X) -> np.ndarray:
        """Fitted probability of each observed label."""
        check_is_fitted(self, "probabilities_")
        return self.probabilities_[label_indices(X, self.alphabet_)]

    def score_samples(self, X) -> np.ndarray:
        """Log-probability of each label (``-inf`` for letters with zero mass)."""
        with np.errstate(divide="ignore"):
            return np.log(self.predict_proba(X))

    def score(self, X, y=None) -> float:
        """Mean log-likelihood of ``X``."""
        return float(np.mean(self.score_samples(X)))

    def sample(self, n_samples: int = 1, random_state=None) -> np.ndarray:
        """Draw labels from the fitted distribution."""
        check_is_fitted(self, "probabilities_")
        rng = check_random_state(random_state)
        p = np.clip(self.probabilities_, 0.0, None)
        idx = rng.choice(self.alphabet_.m, size=n_samples, p=p / p.sum())
        return np.asarray(self.alphabet_.labels, dtype=object)[idx]


class ConstrainedMultinomialMLE(_SimplexDensity):
    """Multinomial maximum likelihood over a polyhedral subset of the simplex.

    Parameters
    ----------
    alphabet : sequence or int
        Outcome labels, or the number of letters for labels ``0..m-1``.
    constraints : ConstraintModel or sequence
        Rows accepted by :func:`simplex_mle.validation.check_constraints`.
    method : {"pp", "ap"}
        Perturbed-primal path following, or explicit optimization over the
        passive mass.
    tol : float, optional
        Stopping tolerance of the path following; ``SIMPLEX_MLE_TOL`` or
        1e-7 when None.
    deltas : sequence of float, optional
        Perturbation schedule; uniform activation at ``10^-1..10^-9`` by default.

    Attributes
    ----------
    probabilities_ : ndarray of shape (m,)
    value_ : float
        Kerridge inaccuracy of the fitted distribution against the observed type.
    type_ : TypeVector
    classification_ : Classification
        Whether the feasible set is an H-set, a Z-set or regular for the data.
    result_ : PPResult or APResult
    """

    def __init__(self, alphabet=None, constraints=None, method: str = "pp", tol=None,
                 deltas=None):
        self.alphabet = alphabet
        self.constraints = constraints
        self.method = method
        self.tol = tol
        self.deltas = deltas

    def _fit_type(self, nu: TypeVector):
        if self.method not in _METHODS:
            raise ValidationError(f"method must be one of {_METHODS}, got {self.method!r}")
        tol = default_tolerance() if self.tol is None else check_tolerance(self.tol)
        self.type_ = nu
        self.classification_ = classify(self.model_, nu)
        if self.method == "pp":
            schedule = PerturbationSchedule(tuple(self.deltas)) if self.deltas is not None else None
            self.result_ = pp_solve(self.model_, nu, schedule=schedule, tol=tol)
        else:
            self.result_ = active_passive_solve(self.model_, nu)
        self.probabilities_ = np.asarray(self.result_.q, dtype=float)
        self.value_ = float(self.result_.value)
        return self


class EmpiricalLikelihood(_SimplexDensity):
    """Empirical likelihood: the same problem with unobserved letters pinned to zero.

    When EL has no solution (convex-hull or zero-likelihood failure) ``fit``
    still succeeds; ``failure_`` names the failure and ``probabilities_`` is
    None.
    """

    def __init__(self, alphabet=None, constraints=None):
        self.alphabet = alphabet
        self.constraints = constraints

    def _fit_type(self, nu: TypeVector):
        self.type_ = nu
        self.result_ = el_solve(self.model_, nu)
        self.failure_ = self.result_.failure
        self.value_ = float(self.result_.value)
        self.probabilities_ = self.result_.padded(nu.m) if self.result_.ok else None
        return self

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "failure_")
        if self.failure_ is not None:
            raise ValidationError(f"empirical likelihood failed ({self.failure_.value})")
        return super().predict_proba(X)

"""Alphabets, types and the Kerridge-inaccuracy kernel.

Everything in here is plain immutable data plus pure functions; the solver
modules build on these primitives.

Extended reals are represented by Python floats: ``math.inf`` is the only
non-finite value an objective may take.  A ``-inf`` or ``nan`` coming out of
any computation here is treated as a bug and rejected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .exceptions import ValidationError

#: Tolerance on ``|sum(nu) - 1|`` when a type vector is ingested.
TYPE_SUM_TOL = 1e-12
#: Tolerance on ``|sum(q) - 1|`` for probability vectors returned by solvers.
PROB_SUM_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Alphabet:
    """A finite sample space: ``m`` distinct outcome labels."""

    labels: tuple

    def __init__(self, labels: Sequence):
        labels = tuple(labels)
        if len(labels) < 1:
            raise ValidationError("alphabet must contain at least one letter")
        if len(set(labels)) != len(labels):
            raise ValidationError(f"alphabet labels are not distinct: {labels!r}")
        object.__setattr__(self, "labels", labels)

    @property
    def m(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def is_numeric(self) -> bool:
        return all(
            isinstance(x, (int, float, np.integer, np.floating)) and not isinstance(x, bool)
            for x in self.labels
        )

    def values(self) -> np.ndarray:
        """Labels as a float array; only valid for numeric alphabets."""
        if not self.is_numeric:
            raise ValidationError("alphabet labels are not numeric")
        return np.asarray(self.labels, dtype=float)

    def index(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError(f"label {label!r} is not in the alphabet") from None

    @classmethod
    def range(cls, m: int) -> "Alphabet":
        return cls(tuple(range(m)))


@dataclass(frozen=True)
class TypeVector:
    """Observed relative frequencies ``nu`` of the letters, optionally with the sample size.

    The active letters are those with ``nu_i > 0``; the rest are passive.
    """

    nu: np.ndarray
    n: Optional[int] = None

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=float)
        if nu.ndim != 1 or nu.size == 0:
            raise ValidationError("type vector must be a non-empty 1-D array")
        if not np.all(np.isfinite(nu)) or np.any(nu < 0):
            raise ValidationError("type vector entries must be finite and nonnegative")
        if abs(nu.sum() - 1.0) > TYPE_SUM_TOL:
            raise ValidationError(f"type vector sums to {nu.sum()!r}, not 1")
        if not np.any(nu > 0):
            raise ValidationError("type vector has no active letter")
        if self.n is not None and (int(self.n) != self.n or self.n < 1):
            raise ValidationError("sample size n must be a positive integer")
        object.__setattr__(self, "nu", _frozen(nu))

    @classmethod
    def from_counts(cls, counts: Sequence) -> "TypeVector":
        counts = np.asarray(counts)
        if counts.ndim != 1 or counts.size == 0:
            raise ValidationError("counts must be a non-empty 1-D array")
        if np.any(counts < 0) or np.any(np.floor(counts) != counts):
            raise ValidationError("counts must be nonnegative integers")
        n = int(counts.sum())
        if n == 0:
            raise ValidationError("counts are all zero")
        return cls(counts / n, n=n)

    @classmethod
    def from_frequencies(cls, freqs: Sequence, n: Optional[int] = None) -> "TypeVector":
        return cls(np.asarray(freqs, dtype=float), n=n)

    @property
    def m(self) -> int:
        return self.nu.size

    @property
    def active(self) -> np.ndarray:
        return np.flatnonzero(self.nu > 0)

    @property
    def passive(self) -> np.ndarray:
        return np.flatnonzero(self.nu == 0)

    @property
    def m_a(self) -> int:
        return int(np.count_nonzero(self.nu > 0))

    @property
    def m_p(self) -> int:
        return self.m - self.m_a


def as_type_vector(nu) -> TypeVector:
    if isinstance(nu, TypeVector):
        return nu
    return TypeVector(np.asarray(nu, dtype=float))


def check_probability_vector(q, m: Optional[int] = None, tol: float = PROB_SUM_TOL) -> np.ndarray:
    """Validate ``q`` as a point of the probability simplex and return it as an array."""
    q = np.asarray(q, dtype=float)
    if q.ndim != 1:
        raise ValidationError("probability vector must be 1-D")
    if m is not None and q.size != m:
        raise ValidationError(f"probability vector has length {q.size}, expected {m}")
    if not np.all(np.isfinite(q)) or np.any(q < 0):
        raise ValidationError("probability vector entries must be finite and nonnegative")
    if abs(q.sum() - 1.0) > tol:
        raise ValidationError(f"probability vector sums to {q.sum()!r}, not 1")
    return q


def active_passive_split(nu) -> tuple[np.ndarray, np.ndarray]:
    """Return the index arrays ``(active, passive)`` of a type vector."""
    nu = np.asarray(nu.nu if isinstance(nu, TypeVector) else nu, dtype=float)
    if not np.any(nu > 0):
        raise ValidationError("type vector has no active letter")
    return np.flatnonzero(nu > 0), np.flatnonzero(nu <= 0)


def kerridge_inaccuracy(nu, q) -> float:
    """Kerridge inaccuracy ``-sum nu_i log q_i``.

    Uses ``log 0 = -inf`` and ``0 * (-inf) = 0``, so the result is finite
    exactly when ``q`` is positive on every active letter and ``+inf``
    otherwise.  Passive coordinates of ``q`` never matter.
    """
    nu = nu.nu if isinstance(nu, TypeVector) else np.asarray(nu, dtype=float)
    q = np.asarray(q, dtype=float)
    if nu.shape != q.shape:
        raise ValidationError(f"dimension mismatch: nu has {nu.shape}, q has {q.shape}")
    act = nu > 0
    qa = q[act]
    if np.any(qa <= 0):
        return math.inf
    value = float(-np.dot(nu[act], np.log(qa)))
    if math.isnan(value) or value == -math.inf:
        raise ValidationError("Kerridge inaccuracy evaluated to an invalid value")
    return value


def i_divergence(mu: float, a, b) -> float:
    """``I_mu(a || b) = sum a_i log(a_i / (mu + b_i))`` for ``a > 0`` and ``mu + b > 0``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValidationError("dimension mismatch between a and b")
    if np.any(a <= 0):
        raise ValidationError("i_divergence requires a > 0")
    denom = mu + b
    if np.any(denom <= 0):
        raise ValidationError("i_divergence domain violation: mu + b must be positive")
    return float(np.dot(a, np.log(a) - np.log(denom)))


class LikelihoodRatio(NamedTuple):
    ratio: float
    log_ratio: float
    overflow: bool


def likelihood_ratio(n: int, ell_1: float, ell_2: float) -> LikelihoodRatio:
    """Likelihood ratio ``exp(n (ell_1 - ell_2))`` of model 2 against model 1.

    Computed in log space; when the exponential overflows the ratio is
    reported as ``inf`` with ``overflow=True``.
    """
    if not (math.isfinite(ell_1) and math.isfinite(ell_2)):
        raise ValidationError("likelihood_ratio needs finite inaccuracies")
    log_ratio = n * (ell_1 - ell_2)
    try:
        return LikelihoodRatio(math.exp(log_ratio), log_ratio, False)
    except OverflowError:
        return LikelihoodRatio(math.inf, log_ratio, True)

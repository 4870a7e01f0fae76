"""Input checks shared by the estimators and the command line."""
from __future__ import annotations

import math
import os
from typing import Optional

import numpy as np

from .core import Alphabet, TypeVector
from .exceptions import ValidationError
from .geometry import ConstraintModel, ConstraintRow, RowKind

TOL_ENV = "SIMPLEX_MLE_TOL"
DEFAULT_TOL = 1e-7


def check_tolerance(tol) -> float:
    try:
        tol = float(tol)
    except (TypeError, ValueError):
        raise ValidationError(f"tolerance must be a number, got {tol!r}") from None
    if not (math.isfinite(tol) and 0 < tol < 1):
        raise ValidationError(f"tolerance must lie in (0, 1), got {tol!r}")
    return tol


def default_tolerance() -> float:
    """``SIMPLEX_MLE_TOL`` when set, otherwise 1e-7."""
    raw = os.environ.get(TOL_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_TOL
    return check_tolerance(raw)


def check_alphabet(alphabet) -> Alphabet:
    if isinstance(alphabet, Alphabet):
        return alphabet
    if isinstance(alphabet, (int, np.integer)):
        return Alphabet.range(int(alphabet))
    return Alphabet(list(alphabet))


def label_indices(X, alphabet: Alphabet) -> np.ndarray:
    """Map observed labels to letter indices, rejecting labels outside the alphabet."""
    X = np.asarray(X, dtype=object).ravel()
    if X.size == 0:
        raise ValidationError("no observations")
    lookup = {lab: i for i, lab in enumerate(alphabet.labels)}
    if alphabet.is_numeric:
        # numeric labels compare by value, so 1 and 1.0 are the same letter
        lookup = {float(k): v for k, v in lookup.items()}
        try:
            keys = [float(x) for x in X]
        except (TypeError, ValueError):
            raise ValidationError("observations are not numeric but the alphabet is") from None
    else:
        keys = list(X)
    try:
        return np.array([lookup[k] for k in keys], dtype=int)
    except KeyError as exc:
        raise ValidationError(f"observation {exc.args[0]!r} is not in the alphabet") from None


def type_from_labels(X, alphabet: Alphabet, sample_weight=None) -> TypeVector:
    """Relative frequencies of the observed labels; ``n`` is kept for unweighted data."""
    idx = label_indices(X, alphabet)
    if sample_weight is None:
        return TypeVector.from_counts(np.bincount(idx, minlength=alphabet.m))
    w = np.asarray(sample_weight, dtype=float).ravel()
    if w.shape != idx.shape or np.any(w < 0) or not np.all(np.isfinite(w)) or w.sum() <= 0:
        raise ValidationError("sample_weight must be nonnegative, finite and match the observations")
    freq = np.bincount(idx, weights=w, minlength=alphabet.m)
    return TypeVector(freq / freq.sum())


def _row(spec, alphabet: Alphabet) -> ConstraintRow:
    if isinstance(spec, ConstraintRow):
        return spec
    if isinstance(spec, dict):
        try:
            kind = RowKind(spec.get("kind", "eq"))
        except ValueError:
            raise ValidationError(f"constraint kind must be 'eq' or 'le', got {spec.get('kind')!r}") from None
        rhs = float(spec.get("rhs", 0.0))
        if "moment" in spec:
            k = spec["moment"]
            if int(k) != k or k < 0:
                raise ValidationError(f"moment order must be a nonnegative integer, got {k!r}")
            return ConstraintRow(alphabet.values() ** int(k), rhs, kind)
        if "u" not in spec:
            raise ValidationError("constraint needs either 'u' or 'moment'")
        return ConstraintRow(spec["u"], rhs, kind)
    if isinstance(spec, (tuple, list)) and len(spec) in (2, 3) and np.ndim(spec[0]) == 1:
        return ConstraintRow(*spec)
    return ConstraintRow(spec)


def check_constraints(constraints, alphabet: Alphabet) -> ConstraintModel:
    """Build a :class:`ConstraintModel` from a model, a matrix, or a list of row specs.

    Row specs are :class:`ConstraintRow`, dicts ``{kind, u, rhs}`` or
    ``{kind, moment, rhs}``, tuples ``(u, rhs[, kind])`` or bare vectors
    (equality with zero right-hand side).
    """
    if isinstance(constraints, ConstraintModel):
        if constraints.alphabet != alphabet:
            raise ValidationError("constraint model is defined over a different alphabet")
        return constraints
    if constraints is None:
        return ConstraintModel(alphabet, ())
    if isinstance(constraints, np.ndarray) and constraints.ndim == 2:
        constraints = list(constraints)
    return ConstraintModel(alphabet, tuple(_row(s, alphabet) for s in constraints))


def check_vector(v, m: Optional[int] = None, name: str = "vector") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or not np.all(np.isfinite(v)):
        raise ValidationError(f"{name} must be a finite 1-D array")
    if m is not None and v.size != m:
        raise ValidationError(f"{name} has length {v.size}, expected {m}")
    return v


"""Polyhedral feasible sets inside the probability simplex.

A :class:`ConstraintModel` is the set ``C`` of distributions ``q`` on an
alphabet that satisfy a list of affine rows ``<q, u> = c`` or ``<q, u> <= c``.
Because ``sum(q) = 1`` every row is equivalent to the homogeneous row
``<q, u - c> (= or <=) 0`` and that is how the solvers consume it.

All queries on ``C`` (support, classification with respect to a type, polar
cone membership, passive slices) reduce to small linear programs solved by
:func:`simplex_mle.lp.lp_solve`.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import Alphabet, TypeVector, as_type_vector
from .exceptions import EmptySliceError, InfeasibleError, StructuralZeroError, ValidationError
from .lp import lp_solve

#: ``t_star`` at or below this counts as zero (LP degeneracy noise).
ZERO_TOL = 1e-9
#: Residual tolerance for points reported as members of ``C``.
MEMBER_TOL = 1e-9


class RowKind(str, enum.Enum):
    EQ = "eq"
    LE = "le"


@dataclass(frozen=True)
class ConstraintRow:
    """One affine row ``<q, u> = rhs`` (``kind="eq"``) or ``<q, u> <= rhs`` (``kind="le"``)."""

    u: np.ndarray
    rhs: float = 0.0
    kind: RowKind = RowKind.EQ

    def __post_init__(self):
        u = np.array(self.u, dtype=float)
        if u.ndim != 1 or not np.all(np.isfinite(u)):
            raise ValidationError("constraint vector must be a finite 1-D array")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "rhs", float(self.rhs))
        object.__setattr__(self, "kind", RowKind(self.kind))

    @property
    def homogeneous(self) -> np.ndarray:
        """``u - rhs * 1``; the row then reads ``<q, .> (= or <=) 0`` on the simplex."""
        return self.u - self.rhs

    @property
    def is_inequality(self) -> bool:
        return self.kind is RowKind.LE


@dataclass(frozen=True)
class ConstraintModel:
    """The feasible set ``C = {q in simplex : all rows hold}``."""

    alphabet: Alphabet
    rows: tuple = field(default_factory=tuple)

    def __post_init__(self):
        rows = tuple(r if isinstance(r, ConstraintRow) else ConstraintRow(*r) for r in self.rows)
        for r in rows:
            if r.u.size != self.alphabet.m:
                raise ValidationError(
                    f"constraint vector has length {r.u.size}, alphabet has {self.alphabet.m} letters"
                )
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_arrays(cls, U, rhs=None, kinds=None, labels: Optional[Sequence] = None) -> "ConstraintModel":
        """Build a model from a ``(r, m)`` matrix of row vectors."""
        U = np.atleast_2d(np.asarray(U, dtype=float))
        if U.size == 0:
            if labels is None:
                raise ValidationError("cannot infer the alphabet size from an empty row matrix")
            return cls(Alphabet(labels), ())
        r, m = U.shape
        rhs = np.zeros(r) if rhs is None else np.broadcast_to(np.asarray(rhs, dtype=float), (r,))
        kinds = [RowKind.EQ] * r if kinds is None else list(kinds)
        alphabet = Alphabet(labels) if labels is not None else Alphabet.range(m)
        return cls(alphabet, tuple(ConstraintRow(U[h], rhs[h], kinds[h]) for h in range(r)))

    @property
    def m(self) -> int:
        return self.alphabet.m

    @property
    def r(self) -> int:
        return len(self.rows)

    @property
    def directions(self) -> np.ndarray:
        """Homogenized row vectors stacked into an ``(r, m)`` matrix."""
        if not self.rows:
            return np.zeros((0, self.m))
        return np.vstack([row.homogeneous for row in self.rows])

    @property
    def inequality_mask(self) -> np.ndarray:
        return np.array([row.is_inequality for row in self.rows], dtype=bool)

    @property
    def is_linear(self) -> bool:
        return not self.inequality_mask.any()

    def restricted(self, idx) -> "ConstraintModel":
        """The model on the letters ``idx`` with all other coordinates pinned to zero."""
        idx = np.asarray(idx, dtype=int)
        labels = [self.alphabet.labels[i] for i in idx]
        rows = tuple(ConstraintRow(row.homogeneous[idx], 0.0, row.kind) for row in self.rows)
        return ConstraintModel(Alphabet(labels), rows)

    def lp_rows(self, idx=None, extra_cols: int = 0):
        """``(A_ub, b_ub, A_eq, b_eq)`` describing ``C`` (restricted to ``idx``) for :func:`lp_solve`.

        ``extra_cols`` zero columns are appended for auxiliary LP variables.
        """
        D = self.directions
        ineq = self.inequality_mask
        if idx is not None:
            D = D[:, np.asarray(idx, dtype=int)]
        k = D.shape[1]
        pad = np.zeros((D.shape[0], extra_cols))
        D = np.hstack([D, pad])
        A_ub = D[ineq]
        A_eq = np.vstack([np.concatenate([np.ones(k), np.zeros(extra_cols)]), D[~ineq]])
        return A_ub, np.zeros(A_ub.shape[0]), A_eq, np.concatenate([[1.0], np.zeros(A_eq.shape[0] - 1)])

    def residuals(self, q) -> np.ndarray:
        """Per-row violations of the original (non-homogenized) rows, then ``|sum(q) - 1|``.

        Equality rows report ``|<q,u> - c|``; inequality rows the positive part of ``<q,u> - c``.
        """
        q = np.asarray(q, dtype=float)
        out = []
        for row in self.rows:
            d = float(q @ row.u - row.rhs)
            out.append(max(d, 0.0) if row.is_inequality else abs(d))
        out.append(abs(float(q.sum()) - 1.0))
        return np.array(out)

    def contains(self, q, tol: float = MEMBER_TOL) -> bool:
        q = np.asarray(q, dtype=float)
        return bool(np.all(q >= -tol) and np.all(self.residuals(q) <= tol))


class Verdict(str, enum.Enum):
    HSET = "h-set"
    ZSET = "z-set"
    REGULAR = "regular"


@dataclass(frozen=True)
class Classification:
    """Position of ``C`` relative to a type.

    ``witness`` is a distribution in ``C`` that is positive on every active
    letter and zero on the passive ones (only for ``REGULAR``).
    ``forced_zero`` lists the active letters that every active-supported
    member of ``C`` leaves at zero (only for ``ZSET``).
    """

    verdict: Verdict
    witness: Optional[np.ndarray] = None
    forced_zero: tuple = ()
    t_star: Optional[float] = None


@dataclass(frozen=True)
class SupportCheck:
    t_star: float
    witness: np.ndarray

    @property
    def full_support(self) -> bool:
        return self.t_star > ZERO_TOL


@dataclass(frozen=True)
class SliceDescription:
    """The passive slice ``{q^p >= 0 : (q^a, q^p) in C}`` for fixed active coordinates."""

    representative: np.ndarray
    is_singleton: bool
    free_dimension: int
    lower: np.ndarray
    upper: np.ndarray


def _max_min_coordinate(model: ConstraintModel, idx, nvars=None) -> tuple[float, np.ndarray]:
    """Maximize ``t`` subject to ``q_i >= t`` for ``i`` in ``idx`` and ``q in C`` restricted to ``idx``."""
    idx = np.asarray(idx, dtype=int)
    k = idx.size
    A_ub, b_ub, A_eq, b_eq = model.lp_rows(idx, extra_cols=1)
    T = np.hstack([-np.eye(k), np.ones((k, 1))])
    A_ub = np.vstack([A_ub, T])
    b_ub = np.concatenate([b_ub, np.zeros(k)])
    c = np.zeros(k + 1)
    c[-1] = 1.0
    res = lp_solve(c, A_ub, b_ub, A_eq, b_eq)
    return res.value, res.x[:k]


def support_check(model: ConstraintModel) -> SupportCheck:
    """Largest ``t`` such that some ``q in C`` has every coordinate ``>= t``.

    ``C`` has full support exactly when ``t_star > 0``.

    Raises
    ------
    InfeasibleError
        If ``C`` is empty.
    """
    try:
        t, q = _max_min_coordinate(model, np.arange(model.m))
    except InfeasibleError:
        raise InfeasibleError("the feasible set is empty") from None
    return SupportCheck(t, q)


def require_full_support(model: ConstraintModel) -> SupportCheck:
    sc = support_check(model)
    if not sc.full_support:
        raise StructuralZeroError(
            f"feasible set does not have full support (t_star = {sc.t_star:.3g}); "
            "structural zeros must be removed from the alphabet"
        )
    return sc


def classify(model: ConstraintModel, nu) -> Classification:
    """Classify ``C`` as an H-set, a Z-set or regular with respect to ``nu``.

    H-set: no member of ``C`` vanishes on all passive letters.  Z-set: such
    members exist but all of them leave some active letter at zero.
    """
    nu = as_type_vector(nu)
    if nu.m != model.m:
        raise ValidationError("type vector and model have different alphabet sizes")
    act = nu.active
    try:
        t, qa = _max_min_coordinate(model, act)
    except InfeasibleError:
        return Classification(Verdict.HSET)
    if t > ZERO_TOL:
        witness = np.zeros(model.m)
        witness[act] = qa
        return Classification(Verdict.REGULAR, witness=witness, t_star=t)
    A_ub, b_ub, A_eq, b_eq = model.lp_rows(act)
    forced = []
    for k, i in enumerate(act):
        c = np.zeros(act.size)
        c[k] = 1.0
        if lp_solve(c, A_ub, b_ub, A_eq, b_eq).value <= ZERO_TOL:
            forced.append(int(i))
    return Classification(Verdict.ZSET, forced_zero=tuple(forced), t_star=t)


def polar_support(model: ConstraintModel, y) -> float:
    """``max <y, q>`` over ``q in C``."""
    y = np.asarray(y, dtype=float)
    A_ub, b_ub, A_eq, b_eq = model.lp_rows()
    return lp_solve(y, A_ub, b_ub, A_eq, b_eq).value


def polar_cone_membership(model: ConstraintModel, y, tol: float = 1e-9) -> bool:
    """Whether ``y`` lies in the polar cone of ``C``, i.e. ``<y, q> <= tol`` on all of ``C``."""
    return polar_support(model, y) <= tol


def _slice_lp_rows(model: ConstraintModel, active, passive, q_active):
    D = model.directions
    ineq = model.inequality_mask
    shift = -(D[:, active] @ q_active)
    Dp = D[:, passive]
    A_ub, b_ub = Dp[ineq], shift[ineq]
    A_eq = np.vstack([np.ones(passive.size), Dp[~ineq]])
    b_eq = np.concatenate([[1.0 - q_active.sum()], shift[~ineq]])
    return A_ub, b_ub, A_eq, b_eq


def slice_passive(model: ConstraintModel, nu, q_active, representative=None,
                  tol: float = 1e-9) -> SliceDescription:
    """Describe the passive completions of the active coordinates ``q_active``.

    Each passive coordinate is maximized and minimized by LP.  The slice is a
    singleton when every coordinate range collapses; ``free_dimension`` is its
    affine dimension (implicit equalities detected by LP).  When the slice is
    not a singleton the caller may hand in a canonical ``representative``
    (for instance the perturbed-primal limit); otherwise the midpoint of the
    extreme vertices found is used.

    Raises
    ------
    EmptySliceError
        If no passive completion exists.
    """
    nu = as_type_vector(nu)
    act, pas = nu.active, nu.passive
    q_active = np.asarray(q_active, dtype=float)
    if q_active.size != act.size:
        raise ValidationError("q_active must have one entry per active letter")
    if pas.size == 0:
        if abs(q_active.sum() - 1.0) > tol:
            raise EmptySliceError("no passive letters to carry the missing mass")
        return SliceDescription(np.zeros(0), True, 0, np.zeros(0), np.zeros(0))

    A_ub, b_ub, A_eq, b_eq = _slice_lp_rows(model, act, pas, q_active)
    k = pas.size
    lo, hi, pts = np.empty(k), np.empty(k), []
    try:
        for i in range(k):
            c = np.zeros(k)
            c[i] = 1.0
            r_hi = lp_solve(c, A_ub, b_ub, A_eq, b_eq)
            r_lo = lp_solve(c, A_ub, b_ub, A_eq, b_eq, maximize=False)
            hi[i], lo[i] = r_hi.value, r_lo.value
            pts += [r_hi.x, r_lo.x]
    except InfeasibleError:
        raise EmptySliceError("the slice of C at these active coordinates is empty") from None

    # implicit equalities: nonnegativity bounds that never leave zero, inequality rows never slack
    implicit = [np.eye(k)[i] for i in range(k) if hi[i] <= tol]
    for g, h in zip(A_ub, b_ub):
        if h - lp_solve(g, A_ub, b_ub, A_eq, b_eq, maximize=False).value <= tol:
            implicit.append(g)
    E = np.vstack([A_eq] + implicit) if implicit else A_eq
    rank = np.linalg.matrix_rank(E, tol=1e-9) if E.size else 0
    free_dim = int(k - rank)
    singleton = bool(np.all(hi - lo <= tol))
    if singleton:
        rep = pts[0]
    elif representative is not None:
        rep = np.asarray(representative, dtype=float)
    else:
        rep = np.mean(pts, axis=0)
    return SliceDescription(rep, singleton, 0 if singleton else free_dim, lo, hi)


def passive_projection_hull(model: ConstraintModel, nu, tol: float = 1e-9):
    """Affine hull of the passive projection ``C^p`` of ``C``.

    Returns ``(points, basis)``: members of ``C^p`` spanning its affine hull
    (as rows) and an orthonormal basis of the hull's direction space (as
    columns, shape ``(m_p, d)``).
    """
    nu = as_type_vector(nu)
    pas = nu.passive
    k = pas.size
    A_ub, b_ub, A_eq, b_eq = model.lp_rows()
    x0 = support_check(model).witness[pas]
    points = [x0]
    basis = np.zeros((k, 0))
    while basis.shape[1] < k:
        # orthonormal complement of the current span
        if basis.shape[1]:
            q_full, _ = np.linalg.qr(np.hstack([basis, np.eye(k)]))
            comp = q_full[:, basis.shape[1]:k]
        else:
            comp = np.eye(k)
        grown = False
        for d in comp.T:
            c = np.zeros(model.m)
            c[pas] = d
            ref = d @ x0
            for maximize in (True, False):
                res = lp_solve(c, A_ub, b_ub, A_eq, b_eq, maximize=maximize)
                if abs(res.value - ref) > tol:
                    p = res.x[pas]
                    v = p - x0
                    v -= basis @ (basis.T @ v)
                    basis = np.hstack([basis, (v / np.linalg.norm(v))[:, None]])
                    points.append(p)
                    grown = True
                    break
            if grown:
                break
        if not grown:
            break
    return np.array(points), basis

"""Dense two-phase primal simplex with Bland's anti-cycling rule.

Solves small linear programs over nonnegative variables::

    maximize   c @ x
    subject to A_ub @ x <= b_ub
               A_eq @ x == b_eq
               x >= 0

Problem sizes in this package are tiny (a few dozen rows and columns), so a
full tableau is kept and robustness is preferred over speed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceError, InfeasibleError, UnboundedError

FEAS_TOL = 1e-9
REDUCED_COST_TOL = 1e-10
PIVOT_TOL = 1e-11
MAX_PIVOTS = 100_000


@dataclass(frozen=True)
class LPResult:
    value: float
    x: np.ndarray


def _pivot(T: np.ndarray, i: int, j: int) -> None:
    T[i] /= T[i, j]
    col = T[:, j].copy()
    col[i] = 0.0
    T -= np.outer(col, T[i])
    # roundoff can push basic values a hair below zero
    rhs = T[:-1, -1]
    rhs[(rhs < 0) & (rhs > -FEAS_TOL)] = 0.0


def _iterate(T: np.ndarray, basis: list[int], ncols: int) -> str:
    """Run primal simplex pivots (minimization) on a tableau already in canonical form."""
    M = T.shape[0] - 1
    for _ in range(MAX_PIVOTS):
        rc = T[-1, :ncols]
        entering = np.flatnonzero(rc < -REDUCED_COST_TOL)
        if entering.size == 0:
            return "optimal"
        j = int(entering[0])
        col = T[:M, j]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            return "unbounded"
        ratios = T[rows, -1] / col[rows]
        rmin = ratios.min()
        ties = rows[ratios <= rmin + 1e-12 * (1.0 + abs(rmin))]
        i = int(min(ties, key=lambda k: basis[k]))
        _pivot(T, i, j)
        basis[i] = j
    raise ConvergenceError("simplex iteration limit reached")


def lp_solve(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, maximize: bool = True) -> LPResult:
    """Solve a dense LP over ``x >= 0``.

    Parameters
    ----------
    c : array_like, shape (n,)
        Objective coefficients.
    A_ub, b_ub : array_like, optional
        Inequality rows ``A_ub @ x <= b_ub``.
    A_eq, b_eq : array_like, optional
        Equality rows ``A_eq @ x == b_eq``.
    maximize : bool
        Maximize (default) or minimize ``c @ x``.

    Returns
    -------
    LPResult
        Optimal value and an optimal vertex.

    Raises
    ------
    InfeasibleError
        If no ``x >= 0`` satisfies the rows (phase-one residual above 1e-9).
    UnboundedError
        If the objective is unbounded on the feasible set.
    """
    c = np.asarray(c, dtype=float).ravel()
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    if A_ub.size == 0:
        A_ub = np.zeros((0, n))
    if A_eq.size == 0:
        A_eq = np.zeros((0, n))
    n_ub, n_eq = A_ub.shape[0], A_eq.shape[0]
    if A_ub.shape[1] != n or A_eq.shape[1] != n or b_ub.size != n_ub or b_eq.size != n_eq:
        raise ValueError("inconsistent LP dimensions")

    # standard form: [A_ub I; A_eq 0] [x; s] = b
    N = n + n_ub
    M = n_ub + n_eq
    A = np.zeros((M, N))
    A[:n_ub, :n] = A_ub
    A[:n_ub, n:] = np.eye(n_ub)
    A[n_ub:, :n] = A_eq
    b = np.concatenate([b_ub, b_eq])
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    cost = np.zeros(N)
    cost[:n] = -c if maximize else c

    if M == 0:
        if np.any(cost < -REDUCED_COST_TOL):
            raise UnboundedError("LP is unbounded")
        x = np.zeros(n)
        return LPResult(float(c @ x), x)

    # phase one: artificial variable per row
    T = np.zeros((M + 1, N + M + 1))
    T[:M, :N] = A
    T[:M, N:N + M] = np.eye(M)
    T[:M, -1] = b
    T[-1, :N] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(N, N + M))
    _iterate(T, basis, N + M)
    if -T[-1, -1] > FEAS_TOL * max(1.0, np.abs(b).max()):
        raise InfeasibleError("LP is infeasible")

    # drive remaining artificials out of the basis, dropping redundant rows
    keep = []
    for i in range(M):
        if basis[i] >= N:
            cand = np.flatnonzero(np.abs(T[i, :N]) > 1e-9)
            if cand.size == 0:
                continue
            _pivot(T, i, int(cand[0]))
            basis[i] = int(cand[0])
        keep.append(i)
    T = np.vstack([T[keep][:, list(range(N)) + [-1]], np.zeros((1, N + 1))])
    basis = [basis[i] for i in keep]
    M = len(keep)

    # phase two
    cb = cost[basis]
    T[-1, :N] = cost - cb @ T[:M, :N]
    T[-1, -1] = -cb @ T[:M, -1]
    if _iterate(T, basis, N) == "unbounded":
        raise UnboundedError("LP is unbounded")

    xs = np.zeros(N)
    xs[basis] = T[:M, -1]
    x = np.clip(xs[:n], 0.0, None)
    return LPResult(float(c @ x), x)

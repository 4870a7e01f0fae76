"""Convex conjugate of the Kerridge inaccuracy.

For a type ``nu`` and ``z in R^m`` the conjugate

    ell*(z) = sup_{q in simplex} <q, z> - ell(q)

has the closed form ``-1 + mu_hat + I_{mu_hat}(nu^a || -z^a)`` where
``mu_bar`` solves ``sum nu^a / (mu - z^a) = 1`` above ``max(z^a)`` and
``mu_hat = max(mu_bar, max(z^p))``.  When the passive maximum wins, the
maximizing distributions put the leftover mass ``1 - xi(mu_hat)`` on the
passive letters attaining ``max(z^p)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import TypeVector
from .exceptions import ValidationError

#: Passive letters within this distance of ``mu_hat`` count as ties.
TIE_TOL = 1e-10
_NEWTON_SWITCH = 1e-3


def _active_weights(nu) -> np.ndarray:
    if isinstance(nu, TypeVector):
        return nu.nu[nu.active]
    w = np.asarray(nu, dtype=float)
    if np.any(w <= 0):
        raise ValidationError("active weights must be positive")
    return w


def xi(nu, z_active, mu: float) -> float:
    """``sum nu^a / (mu - z^a)``; strictly decreasing for ``mu > max(z^a)``.

    ``nu`` is either a :class:`TypeVector` or the array of active weights.
    """
    w = _active_weights(nu)
    za = np.asarray(z_active, dtype=float)
    if za.shape != w.shape:
        raise ValidationError("z_active must have one entry per active letter")
    d = mu - za
    if np.any(d <= 0):
        raise ValidationError("xi is only defined for mu > max(z_active)")
    return float(np.sum(w / d))


def mu_bar(nu, z_active) -> float:
    """Unique root of ``xi(mu) = 1`` on ``(max(z^a), max(z^a) + 1]``.

    Bisection on the bracket until it is narrower than 1e-3, then Newton
    steps that fall back to bisection whenever they leave the bracket.
    """
    w = _active_weights(nu)
    za = np.asarray(z_active, dtype=float)
    if za.shape != w.shape:
        raise ValidationError("z_active must have one entry per active letter")
    wsum = w.sum()
    if abs(wsum - 1.0) > 1e-10:
        raise ValidationError(f"active weights must sum to 1, got {wsum!r}")
    top = za.max()
    shift = za - top  # translation invariance: solve for mu - top

    def f(s):
        # tiny weights can drive the left end to the pole, where xi is +inf
        with np.errstate(divide="ignore"):
            return float(np.sum(w / (s - shift))) - 1.0

    # xi has a pole at s = 0; a weight-sized offset keeps the left end above the root
    lo = 0.5 * w[shift == 0].max()
    while f(lo) <= 0:
        lo *= 0.5
    hi = 1.0
    if f(hi) >= 0:
        return top + hi
    while hi - lo > _NEWTON_SWITCH:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    s = 0.5 * (lo + hi)
    for _ in range(100):
        d = s - shift
        fs = float(np.sum(w / d)) - 1.0
        if fs > 0:
            lo = s
        elif fs < 0:
            hi = s
        else:
            break
        step = fs / float(np.sum(w / d**2))
        s_new = s + step
        if not (lo < s_new < hi):
            s_new = 0.5 * (lo + hi)
        if abs(s_new - s) <= 4 * np.finfo(float).eps * max(1.0, s):
            s = s_new
            break
        s = s_new
    return top + s


def mu_hat(nu: TypeVector, z) -> float:
    """``max(mu_bar(z^a), max(z^p))``; equals ``mu_bar`` when there are no passive letters."""
    z = np.asarray(z, dtype=float)
    if z.size != nu.m:
        raise ValidationError("z must have one entry per letter")
    mb = mu_bar(nu, z[nu.active])
    pas = nu.passive
    return max(mb, float(z[pas].max())) if pas.size else mb


@dataclass(frozen=True)
class ConjugateResult:
    """Value of the conjugate and the structure of its maximizers.

    ``q_active`` are the (unique) active coordinates of every maximizer;
    ``passive_mass`` is split arbitrarily over ``passive_support``.
    """

    mu_bar: float
    mu_hat: float
    value: float
    q_active: np.ndarray
    passive_mass: float
    passive_support: tuple
    active: np.ndarray
    m: int

    def maximizer(self) -> np.ndarray:
        """One maximizing distribution: leftover mass split evenly over ``passive_support``."""
        q = np.zeros(self.m)
        q[self.active] = self.q_active
        if self.passive_support:
            q[list(self.passive_support)] = self.passive_mass / len(self.passive_support)
        return q


def conjugate(nu: TypeVector, z) -> ConjugateResult:
    """Evaluate ``ell*(z)`` via the corrected multiplier ``mu_hat``."""
    z = np.asarray(z, dtype=float)
    if z.size != nu.m:
        raise ValidationError("z must have one entry per letter")
    act, pas = nu.active, nu.passive
    w = nu.nu[act]
    za = z[act]
    mb = mu_bar(nu, za)
    mh = max(mb, float(z[pas].max())) if pas.size else mb
    gap = mh - za
    # log of the quotient taken term by term to avoid cancellation
    value = -1.0 + mh + float(np.sum(w * (np.log(w) - np.log(gap))))
    qa = w / gap
    mass = min(max(1.0 - float(qa.sum()), 0.0), 1.0)
    support = ()
    if pas.size and mass > 0:
        support = tuple(int(i) for i in pas[np.abs(z[pas] - mh) <= TIE_TOL])
        if not support:
            mass = 0.0
    if not math.isfinite(value):
        raise ValidationError("conjugate evaluated to a non-finite value")
    return ConjugateResult(mb, mh, value, qa, mass, support, act, nu.m)

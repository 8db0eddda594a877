"""Log-gamma, digamma and trigamma plus the Gamma-family moment bound.

All three special functions shift the argument upward by recurrence until it
exceeds ``_ASYMPTOTIC_THRESHOLD`` and then sum the Stirling/Bernoulli series.
Inputs may be scalars or numpy arrays; scalars come back as ``float``.

The closed-form bound :func:`m_bound` majorises ``E[ln^2 X]`` for
``X ~ Gamma(mu, 1)`` only outside the interval (0.2163, 1.3803); inside it
the bound is smaller than the true moment (for instance at mu = 1 the moment
is 1.978 while the bound is 23/12). :func:`gamma_a_star` warns when the
requested shape range touches that interval.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError

__all__ = [
    "BERNOULLI_2N",
    "GammaBoundResult",
    "M_BOUND_ARGMIN",
    "MomentBoundWarning",
    "digamma",
    "gamma_a_star",
    "ln_gamma",
    "m_bound",
    "m_bound_grid_scan",
    "second_log_moment",
    "trigamma",
    "trigamma_bound_gap",
]

# B_2, B_4, ..., B_16
BERNOULLI_2N = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
)

_ASYMPTOTIC_THRESHOLD = 10.0
_HALF_LN_2PI = 0.5 * math.log(2.0 * math.pi)

# Location of the minimum of M(mu) quoted for the Gamma example.
M_BOUND_ARGMIN = 1.865

# Where second_log_moment(mu) > m_bound(mu); located by root finding.
_M_BOUND_INVALID = (0.21627, 1.38033)


class MomentBoundWarning(UserWarning):
    """The closed-form bound M(mu) does not majorise E[ln^2 X] on the range."""


def _as_positive_array(x, name: str) -> tuple[np.ndarray, bool]:
    scalar = np.ndim(x) == 0
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(arr > 0) or np.any(np.isnan(arr)):
        raise DomainError(f"{name} requires a strictly positive argument")
    return np.atleast_1d(arr), scalar


def _shift_count(arr: np.ndarray) -> np.ndarray:
    return np.maximum(0, np.ceil(_ASYMPTOTIC_THRESHOLD - arr)).astype(np.int64)


def _out(values: np.ndarray, scalar: bool):
    return float(values[0]) if scalar else values


def ln_gamma(x):
    """Natural log of the Gamma function for ``x > 0``."""
    arr, scalar = _as_positive_array(x, "ln_gamma")
    n = _shift_count(arr)
    z = arr + n
    prod = np.ones_like(arr)
    for k in range(int(n.max(initial=0))):
        active = k < n
        prod[active] *= arr[active] + k
    inv = 1.0 / z
    inv2 = inv * inv
    series = np.zeros_like(z)
    power = inv.copy()
    for i, b in enumerate(BERNOULLI_2N, start=1):
        series += b / (2 * i * (2 * i - 1)) * power
        power *= inv2
    result = (z - 0.5) * np.log(z) - z + _HALF_LN_2PI + series - np.log(prod)
    return _out(result, scalar)


def digamma(mu):
    """Digamma function psi(mu) = Gamma'(mu) / Gamma(mu) for ``mu > 0``."""
    arr, scalar = _as_positive_array(mu, "digamma")
    n = _shift_count(arr)
    acc = np.zeros_like(arr)
    for k in range(int(n.max(initial=0))):
        active = k < n
        acc[active] += 1.0 / (arr[active] + k)
    z = arr + n
    inv2 = 1.0 / (z * z)
    series = np.zeros_like(z)
    power = inv2.copy()
    for i, b in enumerate(BERNOULLI_2N, start=1):
        series += b / (2 * i) * power
        power *= inv2
    result = np.log(z) - 0.5 / z - series - acc
    return _out(result, scalar)


def trigamma(mu):
    """First derivative of the digamma function for ``mu > 0``."""
    arr, scalar = _as_positive_array(mu, "trigamma")
    n = _shift_count(arr)
    acc = np.zeros_like(arr)
    for k in range(int(n.max(initial=0))):
        active = k < n
        t = arr[active] + k
        acc[active] += 1.0 / (t * t)
    z = arr + n
    inv = 1.0 / z
    inv2 = inv * inv
    series = np.zeros_like(z)
    power = inv2 * inv
    for b in BERNOULLI_2N:
        series += b * power
        power *= inv2
    result = inv + 0.5 * inv2 + series + acc
    return _out(result, scalar)


def trigamma_bound_gap(mu):
    """``1/mu + 1/(2mu^2) + 1/(6mu^3) - trigamma(mu)`` without cancellation.

    The gap decays like ``1/(30 mu^5)`` and drops below float64 resolution of
    the two terms near mu ~ 3000, so large arguments use the tail of the
    asymptotic series directly.
    """
    arr, scalar = _as_positive_array(mu, "trigamma_bound_gap")
    out = np.empty_like(arr)
    small = arr < _ASYMPTOTIC_THRESHOLD
    if np.any(small):
        m = arr[small]
        out[small] = 1.0 / m + 0.5 / m**2 + 1.0 / (6.0 * m**3) - trigamma(m)
    if np.any(~small):
        m = arr[~small]
        inv2 = 1.0 / (m * m)
        power = inv2 * inv2 / m
        tail = np.zeros_like(m)
        for b in BERNOULLI_2N[1:]:
            tail -= b * power
            power *= inv2
        out[~small] = tail
    return _out(out, scalar)


def second_log_moment(mu):
    """``E[ln^2 X]`` for ``X ~ Gamma(mu, 1)``, i.e. trigamma + digamma squared."""
    psi = digamma(mu)
    return trigamma(mu) + psi * psi


def m_bound(mu):
    """The closed-form majorant M(mu) of the Gamma second log-moment."""
    arr, scalar = _as_positive_array(mu, "m_bound")
    log_mu = np.log(arr)
    mu2 = arr * arr
    mu3 = mu2 * arr
    num = 12.0 * mu2 - 12.0 * mu2 * log_mu + 9.0 * arr + 12.0 * mu3 * log_mu**2 + 2.0
    return _out(num / (12.0 * mu3), scalar)


@lru_cache(maxsize=8)
def m_bound_grid_scan(lo: float = 0.1, hi: float = 100.0, steps: int = 200_001) -> tuple[float, int]:
    """Scan M on a log grid; return the grid argmin and the number of slope sign changes."""
    if not 0 < lo < hi or steps < 3:
        raise DomainError("grid scan needs 0 < lo < hi and at least 3 steps")
    grid = np.geomspace(lo, hi, steps)
    values = m_bound(grid)
    slope_sign = np.sign(np.diff(values))
    slope_sign = slope_sign[slope_sign != 0]
    changes = int(np.count_nonzero(np.diff(slope_sign)))
    return float(grid[np.argmin(values)]), changes


@dataclass(frozen=True)
class GammaBoundResult:
    m1: float
    m2: float
    m: float
    a_star: float


def gamma_a_star(comp_lo: float, comp_hi: float, d: int) -> GammaBoundResult:
    """Lower bound a* on E[S^{-1/2}] for Gamma(theta_i, 1) components.

    ``m`` is the larger of M at the two component endpoints; because M has a
    single interior minimum this is its supremum over ``[comp_lo, comp_hi]``.
    """
    if not 0 < comp_lo <= comp_hi:
        raise DomainError(f"need 0 < comp_lo <= comp_hi, got ({comp_lo}, {comp_hi})")
    if d < 1:
        raise DomainError("d must be a positive integer")
    _, sign_changes = m_bound_grid_scan()
    if sign_changes != 1:
        raise RuntimeError("M(mu) is not unimodal on the scan grid; endpoint maximum is invalid")
    m1 = m_bound(comp_lo)
    m2 = m_bound(comp_hi)
    m = max(m1, m2)
    lo_bad, hi_bad = _M_BOUND_INVALID
    if comp_lo < hi_bad and comp_hi > lo_bad:
        grid = np.geomspace(comp_lo, comp_hi, 65) if comp_hi > comp_lo else np.array([comp_lo])
        worst = float(np.max(second_log_moment(grid)))
        if worst > m:
            warnings.warn(
                f"M(mu) underestimates E[ln^2 X] on [{comp_lo:g}, {comp_hi:g}] "
                f"({worst:.4f} > m={m:.4f}); a* carries no dominance guarantee",
                MomentBoundWarning,
                stacklevel=2,
            )
    return GammaBoundResult(m1=m1, m2=m2, m=m, a_star=1.0 / math.sqrt(m * d))

"""Pure-numpy simulation kernels, vectorised over a block of replications.

Mirrors ``_kernels.pyx`` draw for draw: same counters, same transforms, same
estimator arithmetic. Results agree with the compiled kernel up to libm
rounding.
"""
from __future__ import annotations

import numpy as np

from .rng import BOOST_SLOT, counter, stream_keys, uniforms

NORMAL_IID, NORMAL_CORR, GAMMA, EXPONENTIAL = 0, 1, 2, 3
MLE, JAMES_STEIN, HUDSON, SHRINKAGE = 0, 1, 2, 3
TINY = 1e-300
_TWO_PI = 2.0 * np.pi
_MAX_ATTEMPTS = 1 << 20


def _std_normal(keys, comps, attempt):
    u1 = uniforms(keys, counter(comps, 3 * attempt))
    u2 = uniforms(keys, counter(comps, 3 * attempt + 1))
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)


def _log_gamma_variates(keys, alpha, n, d):
    comps = np.broadcast_to(np.arange(d, dtype=np.uint64), (n, d))
    keys = np.broadcast_to(keys, (n, d))
    alpha = np.broadcast_to(alpha, (n, d))
    boost = alpha < 1.0
    shape = np.where(boost, alpha + 1.0, alpha)
    dd = shape - 1.0 / 3.0
    cc = 1.0 / np.sqrt(9.0 * dd)
    log_v = np.zeros((n, d))
    pending = np.ones((n, d), dtype=bool)
    attempt = np.zeros((n, d), dtype=np.uint64)
    for _ in range(_MAX_ATTEMPTS):
        idx = np.nonzero(pending)
        if idx[0].size == 0:
            break
        k, c, t = keys[idx], comps[idx], attempt[idx]
        z = _std_normal(k, c, t)
        y = 1.0 + cc[idx] * z
        v = y * y * y
        u = uniforms(k, counter(c, 3 * t + 2))
        ok = v > 0
        lv = np.where(ok, np.log(np.where(ok, v, 1.0)), 0.0)
        dv = dd[idx]
        ok &= np.log(u) < 0.5 * z * z + dv - dv * v + dv * lv
        acc = (idx[0][ok], idx[1][ok])
        log_v[acc] = lv[ok]
        pending[acc] = False
        attempt[idx] += np.uint64(1)
    else:
        raise RuntimeError("gamma rejection sampler did not terminate")
    log_x = np.log(dd) + log_v
    if np.any(boost):
        ub = uniforms(keys, counter(comps, BOOST_SLOT))
        log_x = np.where(boost, log_x + np.log(ub) / alpha, log_x)
    return log_x


def sample_block(family_code, theta, chol, seed, rep_start, n_reps):
    """Observations ``x`` and natural statistics ``b(y)`` for ``n_reps`` replications."""
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    d = theta.shape[0]
    keys = stream_keys(seed, np.arange(rep_start, rep_start + n_reps, dtype=np.uint64))[:, None]
    comps = np.arange(d, dtype=np.uint64)[None, :]
    if family_code in (NORMAL_IID, NORMAL_CORR):
        z = _std_normal(keys, comps, np.uint64(0))
        if family_code == NORMAL_CORR:
            z = z @ np.asarray(chol, dtype=np.float64).T
        x = theta + z
        return x, x.copy()
    if family_code == GAMMA:
        log_x = _log_gamma_variates(keys, theta, n_reps, d)
        return np.exp(log_x), log_x
    if family_code == EXPONENTIAL:
        u = uniforms(keys, counter(comps, 0))
        x = -theta * np.log(u)
        return x, -x
    raise ValueError(f"unknown family code {family_code}")


def losses_from_sample(x, stat, theta, sign, est_kinds, est_c):
    n, d = x.shape
    n_est = len(est_kinds)
    losses = np.empty((n, n_est))
    fallback = np.zeros((n, n_est), dtype=np.uint8)
    sq_x = np.sum(x * x, axis=1)
    s = np.sum(stat * stat, axis=1)
    small_x = sq_x < TINY
    small_s = s < TINY
    safe_sq_x = np.where(small_x, 1.0, sq_x)
    safe_s = np.where(small_s, 1.0, s)
    for e, (kind, c) in enumerate(zip(est_kinds, est_c)):
        if kind == MLE:
            delta = x
        elif kind == JAMES_STEIN:
            step = np.where(small_x, 0.0, (d - 2) / safe_sq_x)
            delta = x - step[:, None] * x
            fallback[:, e] = small_x
        elif kind == HUDSON:
            step = np.where(small_s, 0.0, sign * (d - 2) / safe_s)
            delta = x - step[:, None] * stat
            fallback[:, e] = small_s
        elif kind == SHRINKAGE:
            step = np.where(small_s, 0.0, sign * c / np.sqrt(safe_s))
            delta = x - step[:, None] * stat
            fallback[:, e] = small_s
        else:
            raise ValueError(f"unknown estimator code {kind}")
        diff = delta - theta
        losses[:, e] = np.sum(diff * diff, axis=1)
    return losses, s, fallback


def simulate_block(family_code, theta, chol, seed, rep_start, n_reps, est_kinds, est_c, sign):
    """Per-replication losses, S statistics and fallback flags for one block."""
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    x, stat = sample_block(family_code, theta, chol, seed, rep_start, n_reps)
    return losses_from_sample(x, stat, theta, sign, est_kinds, est_c)

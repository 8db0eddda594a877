# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernels.

Same counter layout, transforms and estimator arithmetic as ``_pykernels``;
the replication loop runs without the GIL so blocks can be simulated from
worker threads concurrently.
"""
import numpy as np

from libc.math cimport cos, exp, log, sqrt
from libc.stdint cimport uint8_t, uint64_t
from libc.stdlib cimport free, malloc

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t SEED_SALT = 0x5851F42D4C957F2DULL
cdef uint64_t BOOST_SLOT = 0xFFFFFFFFULL
cdef double TWO_M52 = 2.220446049250313e-16
cdef double TWO_PI = 6.283185307179586
cdef double TINY = 1e-300
cdef long MAX_ATTEMPTS = 1 << 20

cdef enum:
    NORMAL_IID = 0
    NORMAL_CORR = 1
    GAMMA = 2
    EXPONENTIAL = 3

cdef enum:
    MLE = 0
    JAMES_STEIN = 1
    HUDSON = 2
    SHRINKAGE = 3


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z ^= z >> 30
    z *= 0xBF58476D1CE4E5B9ULL
    z ^= z >> 27
    z *= 0x94D049BB133111EBULL
    z ^= z >> 31
    return z


cdef inline uint64_t stream_key(uint64_t seed, uint64_t rep) noexcept nogil:
    return mix64(mix64(seed ^ SEED_SALT) + GOLDEN * (rep + 1))


cdef inline double unif(uint64_t key, uint64_t comp, uint64_t slot) noexcept nogil:
    cdef uint64_t ctr = (comp << 32) | slot
    cdef uint64_t bits = mix64(key ^ mix64(GOLDEN * (ctr + 1)))
    return (<double>(bits >> 12) + 0.5) * TWO_M52


cdef inline double std_normal(uint64_t key, uint64_t comp, uint64_t attempt) noexcept nogil:
    cdef double u1 = unif(key, comp, 3 * attempt)
    cdef double u2 = unif(key, comp, 3 * attempt + 1)
    return sqrt(-2.0 * log(u1)) * cos(TWO_PI * u2)


cdef int log_gamma_variate(uint64_t key, uint64_t comp, double alpha, double* out) noexcept nogil:
    cdef bint boost = alpha < 1.0
    cdef double shape = alpha + 1.0 if boost else alpha
    cdef double dd = shape - 1.0 / 3.0
    cdef double cc = 1.0 / sqrt(9.0 * dd)
    cdef double z, y, v, u, lv
    cdef uint64_t t
    for t in range(MAX_ATTEMPTS):
        z = std_normal(key, comp, t)
        y = 1.0 + cc * z
        v = y * y * y
        u = unif(key, comp, 3 * t + 2)
        if v > 0:
            lv = log(v)
            if log(u) < 0.5 * z * z + dd - dd * v + dd * lv:
                out[0] = log(dd) + lv
                if boost:
                    out[0] = out[0] + log(unif(key, comp, BOOST_SLOT)) / alpha
                return 0
    return -1


cdef int sample_one(int family_code, const double[::1] theta, const double[:, ::1] chol,
                    uint64_t key, double* z, double* x, double* stat) noexcept nogil:
    cdef Py_ssize_t d = theta.shape[0]
    cdef Py_ssize_t i, j
    cdef double acc, lx
    if family_code == NORMAL_IID or family_code == NORMAL_CORR:
        for i in range(d):
            z[i] = std_normal(key, i, 0)
        for i in range(d):
            if family_code == NORMAL_CORR:
                acc = 0.0
                for j in range(d):
                    acc = acc + chol[i, j] * z[j]
            else:
                acc = z[i]
            x[i] = theta[i] + acc
            stat[i] = x[i]
    elif family_code == GAMMA:
        for i in range(d):
            if log_gamma_variate(key, i, theta[i], &lx) != 0:
                return -1
            x[i] = exp(lx)
            stat[i] = lx
    elif family_code == EXPONENTIAL:
        for i in range(d):
            x[i] = -theta[i] * log(unif(key, i, 0))
            stat[i] = -x[i]
    else:
        return -2
    return 0


def _chol_view(chol, Py_ssize_t d):
    if chol is None:
        return np.zeros((1, 1))
    arr = np.ascontiguousarray(chol, dtype=np.float64)
    if arr.shape != (d, d):
        raise ValueError("Cholesky factor has the wrong shape")
    return arr


def sample_block(int family_code, theta, chol, seed, long rep_start, long n_reps):
    """Observations ``x`` and natural statistics ``b(y)`` for ``n_reps`` replications."""
    cdef const double[::1] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef Py_ssize_t d = th.shape[0]
    if family_code == NORMAL_CORR and chol is None:
        raise ValueError("correlated normal needs a Cholesky factor")
    cdef const double[:, ::1] L = _chol_view(chol, d)
    cdef uint64_t s = <uint64_t>int(seed)
    x_arr = np.empty((n_reps, d))
    stat_arr = np.empty((n_reps, d))
    cdef double[:, ::1] xv = x_arr
    cdef double[:, ::1] sv = stat_arr
    cdef double* z = <double*>malloc(max(d, 1) * sizeof(double))
    cdef Py_ssize_t r
    cdef int status = 0
    if z == NULL:
        raise MemoryError()
    try:
        with nogil:
            for r in range(n_reps):
                status = sample_one(family_code, th, L, stream_key(s, rep_start + r), z, &xv[r, 0], &sv[r, 0])
                if status != 0:
                    break
    finally:
        free(z)
    if status == -2:
        raise ValueError(f"unknown family code {family_code}")
    if status != 0:
        raise RuntimeError("gamma rejection sampler did not terminate")
    return x_arr, stat_arr


def simulate_block(int family_code, theta, chol, seed, long rep_start, long n_reps,
                   est_kinds, est_c, double sign):
    """Per-replication losses, S statistics and fallback flags for one block."""
    cdef const double[::1] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef Py_ssize_t d = th.shape[0]
    if family_code == NORMAL_CORR and chol is None:
        raise ValueError("correlated normal needs a Cholesky factor")
    cdef const double[:, ::1] L = _chol_view(chol, d)
    cdef const long[::1] kinds = np.ascontiguousarray(est_kinds, dtype=np.int_)
    cdef const double[::1] cs = np.ascontiguousarray(est_c, dtype=np.float64)
    cdef Py_ssize_t n_est = kinds.shape[0]
    cdef uint64_t s = <uint64_t>int(seed)
    cdef Py_ssize_t r, i, e
    for e in range(n_est):
        if kinds[e] < MLE or kinds[e] > SHRINKAGE:
            raise ValueError(f"unknown estimator code {kinds[e]}")
    losses_arr = np.empty((n_reps, n_est))
    s_arr = np.empty(n_reps)
    fb_arr = np.zeros((n_reps, n_est), dtype=np.uint8)
    cdef double[:, ::1] losses = losses_arr
    cdef double[::1] s_out = s_arr
    cdef uint8_t[:, ::1] fb = fb_arr
    cdef double* buf = <double*>malloc(3 * max(d, 1) * sizeof(double))
    cdef double* z
    cdef double* x
    cdef double* stat
    cdef int status = 0
    cdef double sq_x, ss, step, diff, loss, dm2 = <double>(d - 2)
    cdef bint small_x, small_s
    if buf == NULL:
        raise MemoryError()
    z = buf
    x = buf + d
    stat = buf + 2 * d
    try:
        with nogil:
            for r in range(n_reps):
                status = sample_one(family_code, th, L, stream_key(s, rep_start + r), z, x, stat)
                if status != 0:
                    break
                sq_x = 0.0
                ss = 0.0
                for i in range(d):
                    sq_x = sq_x + x[i] * x[i]
                    ss = ss + stat[i] * stat[i]
                s_out[r] = ss
                small_x = sq_x < TINY
                small_s = ss < TINY
                for e in range(n_est):
                    loss = 0.0
                    if kinds[e] == MLE:
                        for i in range(d):
                            diff = x[i] - th[i]
                            loss = loss + diff * diff
                    elif kinds[e] == JAMES_STEIN:
                        step = 0.0 if small_x else dm2 / sq_x
                        fb[r, e] = small_x
                        for i in range(d):
                            diff = (x[i] - step * x[i]) - th[i]
                            loss = loss + diff * diff
                    else:
                        if small_s:
                            step = 0.0
                        elif kinds[e] == HUDSON:
                            step = sign * dm2 / ss
                        else:
                            step = sign * cs[e] / sqrt(ss)
                        fb[r, e] = small_s
                        for i in range(d):
                            diff = (x[i] - step * stat[i]) - th[i]
                            loss = loss + diff * diff
                    losses[r, e] = loss
    finally:
        free(buf)
    if status == -2:
        raise ValueError(f"unknown family code {family_code}")
    if status != 0:
        raise RuntimeError("gamma rejection sampler did not terminate")
    return losses_arr, s_arr, fb_arr

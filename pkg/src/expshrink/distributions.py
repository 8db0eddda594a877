"""Seeded samplers for the four families.

A replication's observation vector depends only on ``(master_seed,
replication)``: drawing replication ``l`` through :func:`sample_normal_iid`
and friends yields exactly row ``l`` of the corresponding batch sampler, and
the risk engine sees the same vectors.

Normal variates use Box-Muller, Gamma variates Marsaglia-Tsang with the
``U**(1/shape)`` boost for shapes below one (computed in log space, so tiny
shapes do not underflow ``ln x``), exponential variates the inverse CDF.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import DomainError
from .families import EXPONENTIAL, GAMMA, NORMAL_IID, FamilyTag, check_theta
from .rng import RngStream

__all__ = [
    "CovarianceSpec",
    "FAMILY_CODES",
    "Sample",
    "sample_batch",
    "sample_exponential",
    "sample_gamma",
    "sample_normal_corr",
    "sample_normal_iid",
]

FAMILY_CODES = {
    FamilyTag.NORMAL_IID: 0,
    FamilyTag.NORMAL_CORRELATED: 1,
    FamilyTag.GAMMA: 2,
    FamilyTag.EXPONENTIAL: 3,
}


@dataclass(frozen=True)
class CovarianceSpec:
    v: np.ndarray
    lambda_star: float | None = None
    chol: np.ndarray = field(init=False, repr=False)
    lambda_max: float = field(init=False)

    def __post_init__(self):
        v = np.array(self.v, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DomainError("covariance must be a square matrix")
        if not np.allclose(v, v.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(v).max()))):
            raise DomainError("covariance must be symmetric")
        try:
            chol = np.linalg.cholesky(v)
        except np.linalg.LinAlgError:
            raise DomainError("covariance is not positive definite") from None
        lam = float(np.linalg.eigvalsh(v)[-1])
        star = lam if self.lambda_star is None else float(self.lambda_star)
        if lam > star * (1 + 1e-12):
            raise DomainError(f"lambda_max={lam:.6g} exceeds declared bound {star:.6g}")
        v.setflags(write=False)
        chol.setflags(write=False)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "chol", chol)
        object.__setattr__(self, "lambda_max", lam)
        object.__setattr__(self, "lambda_star", star)

    @property
    def d(self) -> int:
        return self.v.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.v))

    @classmethod
    def identity(cls, d: int) -> "CovarianceSpec":
        return cls(np.eye(d))

    @classmethod
    def ar1(cls, d: int, rho: float) -> "CovarianceSpec":
        idx = np.arange(d)
        return cls(rho ** np.abs(idx[:, None] - idx[None, :]))

    @classmethod
    def equicorrelated(cls, d: int, rho: float) -> "CovarianceSpec":
        return cls((1 - rho) * np.eye(d) + rho * np.ones((d, d)))


@dataclass(frozen=True)
class Sample:
    """Observations ``x`` with the natural statistic ``stat = b(y)`` per component."""

    x: np.ndarray
    stat: np.ndarray


def sample_batch(tag, theta, replications: int, master_seed: int, *, start: int = 0,
                 cov: CovarianceSpec | None = None, backend: str | None = None) -> Sample:
    """Rows ``start .. start+replications-1`` of the replication sequence."""
    tag = FamilyTag(tag)
    fam = {FamilyTag.GAMMA: GAMMA, FamilyTag.EXPONENTIAL: EXPONENTIAL}.get(tag, NORMAL_IID)
    theta = check_theta(fam, theta)
    chol = None
    if tag is FamilyTag.NORMAL_CORRELATED:
        if cov is None:
            raise DomainError("correlated normal sampling needs a covariance")
        if cov.d != theta.size:
            raise DomainError(f"covariance is {cov.d}x{cov.d} but theta has length {theta.size}")
        chol = cov.chol
    kernels = _backend.get_kernels(backend)
    x, stat = kernels.sample_block(FAMILY_CODES[tag], theta, chol, master_seed, start, replications)
    return Sample(x, stat)


def _one(tag, theta, stream: RngStream, cov=None) -> Sample:
    s = sample_batch(tag, theta, 1, stream.master_seed, start=stream.stream_index, cov=cov)
    return Sample(s.x[0], s.stat[0])


def sample_normal_iid(theta, stream: RngStream) -> Sample:
    return _one(FamilyTag.NORMAL_IID, theta, stream)


def sample_normal_corr(theta, cov: CovarianceSpec, stream: RngStream) -> Sample:
    return _one(FamilyTag.NORMAL_CORRELATED, theta, stream, cov)


def sample_gamma(theta, stream: RngStream) -> Sample:
    """Gamma(shape=theta_i, rate=1) components; ``stat`` holds ``ln x``."""
    return _one(FamilyTag.GAMMA, theta, stream)


def sample_exponential(theta, stream: RngStream) -> Sample:
    """Exponential components with means ``theta_i``."""
    return _one(FamilyTag.EXPONENTIAL, theta, stream)

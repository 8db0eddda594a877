"""Exponential-family kernels and parameter spaces.

Each family is written as ``f(x) = exp{t * b(y) - psi(t)} k(y)`` where ``y`` is
the observation mapped to the family's natural variable and ``t`` the natural
parameter. For the normal and Gamma families ``y = x`` and ``t = theta``. The
exponential family is carried in its mean parametrisation ``theta`` and only
mapped to ``y = -x``, ``t = 1 / theta`` where the kernel form is needed.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigurationError, DomainError
from .special import ln_gamma

__all__ = [
    "EXPONENTIAL",
    "FAMILIES",
    "FamilyDescriptor",
    "FamilyTag",
    "GAMMA",
    "NORMAL_CORRELATED",
    "NORMAL_IID",
    "ParameterSpace",
    "check_theta",
    "density",
    "family",
    "log_density",
    "s_statistic",
    "validate_parameter_space",
]

_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class FamilyTag(str, enum.Enum):
    NORMAL_IID = "normal_iid"
    NORMAL_CORRELATED = "normal_corr"
    GAMMA = "gamma"
    EXPONENTIAL = "exponential"


ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FamilyDescriptor:
    """Function handles of one family plus the observation/natural-variable map.

    ``a``, ``b``, ``b_prime`` and ``log_k`` act on the natural variable ``y``;
    ``psi`` acts on the natural parameter. ``sign`` maps observations to the
    natural variable (``y = sign * x``).
    """

    tag: FamilyTag
    a: ArrayFn
    b: ArrayFn
    b_prime: ArrayFn
    psi: ArrayFn
    log_k: ArrayFn
    positive_support: bool
    positive_parameter: bool
    sign: float = 1.0
    natural_parameter: ArrayFn = field(default=lambda t: t)

    def k(self, y):
        return np.exp(self.log_k(y))

    def to_natural(self, x):
        return self.sign * np.asarray(x, dtype=np.float64)

    def from_natural(self, y):
        return self.sign * y

    def check_support(self, x) -> np.ndarray:
        arr = np.asarray(x, dtype=np.float64)
        if np.any(np.isnan(arr)):
            raise DomainError("observation contains NaN")
        if self.positive_support and np.any(arr <= 0):
            raise DomainError(f"{self.tag.value} observations must be strictly positive")
        return arr

    def stat(self, x, log_x=None) -> np.ndarray:
        """``b`` of the natural variable; for Gamma pass ``log_x`` to avoid underflow."""
        if log_x is not None:
            if self.tag is not FamilyTag.GAMMA:
                raise DomainError("log-space observations are only meaningful for the Gamma family")
            return np.asarray(log_x, dtype=np.float64)
        arr = self.check_support(x)
        return self.b(self.to_natural(arr))


def _ones(y):
    return np.ones_like(np.asarray(y, dtype=np.float64))


def _identity(y):
    return np.asarray(y, dtype=np.float64)


def _normal_log_k(y):
    y = np.asarray(y, dtype=np.float64)
    return -0.5 * y * y - _LN_SQRT_2PI


def _gamma_log_k(y):
    y = np.asarray(y, dtype=np.float64)
    return -np.log(y) - y


NORMAL_IID = FamilyDescriptor(
    tag=FamilyTag.NORMAL_IID,
    a=_ones,
    b=_identity,
    b_prime=_ones,
    psi=lambda t: 0.5 * np.asarray(t, dtype=np.float64) ** 2,
    log_k=_normal_log_k,
    positive_support=False,
    positive_parameter=False,
)

# Marginal kernel of each coordinate is the unit-variance normal; the
# covariance only enters sampling and the parameter space.
NORMAL_CORRELATED = FamilyDescriptor(
    tag=FamilyTag.NORMAL_CORRELATED,
    a=_ones,
    b=_identity,
    b_prime=_ones,
    psi=lambda t: 0.5 * np.asarray(t, dtype=np.float64) ** 2,
    log_k=_normal_log_k,
    positive_support=False,
    positive_parameter=False,
)

GAMMA = FamilyDescriptor(
    tag=FamilyTag.GAMMA,
    a=_identity,
    b=lambda y: np.log(np.asarray(y, dtype=np.float64)),
    b_prime=lambda y: 1.0 / np.asarray(y, dtype=np.float64),
    psi=lambda t: ln_gamma(t),
    log_k=_gamma_log_k,
    positive_support=True,
    positive_parameter=True,
)

EXPONENTIAL = FamilyDescriptor(
    tag=FamilyTag.EXPONENTIAL,
    a=_ones,
    b=_identity,
    b_prime=_ones,
    psi=lambda lam: -np.log(np.asarray(lam, dtype=np.float64)),
    log_k=lambda y: np.zeros_like(np.asarray(y, dtype=np.float64)),
    positive_support=True,
    positive_parameter=True,
    sign=-1.0,
    natural_parameter=lambda theta: 1.0 / np.asarray(theta, dtype=np.float64),
)

FAMILIES = {
    FamilyTag.NORMAL_IID: NORMAL_IID,
    FamilyTag.NORMAL_CORRELATED: NORMAL_CORRELATED,
    FamilyTag.GAMMA: GAMMA,
    FamilyTag.EXPONENTIAL: EXPONENTIAL,
}


def family(tag: FamilyTag | str) -> FamilyDescriptor:
    try:
        return FAMILIES[FamilyTag(tag)]
    except ValueError:
        raise ConfigurationError(f"unknown family {tag!r}") from None


def check_theta(fam: FamilyDescriptor, theta) -> np.ndarray:
    arr = np.asarray(theta, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise DomainError("theta must be a non-empty 1-d vector")
    if not np.all(np.isfinite(arr)):
        raise DomainError("theta must be finite")
    if fam.positive_parameter and np.any(arr <= 0):
        raise DomainError(f"{fam.tag.value} parameters must be strictly positive")
    return arr


def log_density(fam: FamilyDescriptor, theta_i, x):
    """``theta_i * b(y) - psi(theta_i) + ln k(y)`` in observation coordinates."""
    x = fam.check_support(x)
    theta_i = np.asarray(theta_i, dtype=np.float64)
    if fam.positive_parameter and np.any(theta_i <= 0):
        raise DomainError(f"{fam.tag.value} parameter must be strictly positive")
    y = fam.to_natural(x)
    t = fam.natural_parameter(theta_i)
    out = t * fam.b(y) - fam.psi(t) + fam.log_k(y)
    return float(out) if np.ndim(out) == 0 else out


def density(fam: FamilyDescriptor, theta_i, x):
    out = np.exp(log_density(fam, theta_i, x))
    return float(out) if np.ndim(out) == 0 else out


def s_statistic(fam: FamilyDescriptor, x, log_x=None) -> float:
    """Sum of squared sufficient statistics over the components of ``x``."""
    b = fam.stat(x, log_x)
    return float(np.dot(b, b))


@dataclass(frozen=True)
class ParameterSpace:
    """Bounds on the parameter set: norm bound, component range, eigenvalue bound."""

    tau: float
    comp_lo: float
    comp_hi: float
    lambda_star: float | None = None

    def __post_init__(self):
        if self.tau < 0:
            raise ConfigurationError(f"tau must be non-negative, got {self.tau}")
        if self.comp_lo > self.comp_hi:
            raise ConfigurationError(f"comp_lo {self.comp_lo} exceeds comp_hi {self.comp_hi}")
        if self.lambda_star is not None and self.lambda_star <= 0:
            raise ConfigurationError("lambda_star must be positive when given")

    @classmethod
    def from_theta(cls, theta, cov=None) -> "ParameterSpace":
        """Tightest space containing a known ``theta`` (and covariance, if any)."""
        theta = np.asarray(theta, dtype=np.float64)
        lam = None
        if cov is not None:
            lam = float(np.linalg.eigvalsh(np.asarray(cov, dtype=np.float64))[-1])
        return cls(
            tau=float(np.linalg.norm(theta)),
            comp_lo=float(theta.min()),
            comp_hi=float(theta.max()),
            lambda_star=lam,
        )


def validate_parameter_space(space: ParameterSpace, theta) -> list[str]:
    """Return one message per violated bound; an empty list means ``theta`` fits."""
    theta = np.asarray(theta, dtype=np.float64)
    problems = []
    norm = float(np.linalg.norm(theta))
    # relative slack so that spaces built from theta itself always validate
    slack = 1e-12 * max(1.0, space.tau)
    if norm > space.tau + slack:
        problems.append(f"norm {norm:.6g} exceeds tau={space.tau:.6g}")
    for i, t in enumerate(theta, start=1):
        if t < space.comp_lo:
            problems.append(f"theta_{i}={t:.6g} below comp_lo={space.comp_lo:.6g}")
        elif t > space.comp_hi:
            problems.append(f"theta_{i}={t:.6g} above comp_hi={space.comp_hi:.6g}")
    return problems

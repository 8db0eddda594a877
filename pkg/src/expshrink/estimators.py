"""MLE, James-Stein, Hudson and the c/sqrt(S) shrinkage estimator.

Every estimator accepts a single observation of shape ``(d,)`` or a stack of
them of shape ``(n, d)``. When ``S`` (or ``||x||^2`` for James-Stein) is below
``TINY`` the estimate falls back to the MLE and the ``fallback`` flag is set.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import special
from .errors import ConfigurationError, DomainError
from .families import FamilyDescriptor, FamilyTag, ParameterSpace

__all__ = [
    "Estimate",
    "EstimatorKind",
    "EstimatorSpec",
    "TINY",
    "a_star",
    "hudson",
    "james_stein",
    "mle",
    "optimal_c",
    "shrinkage",
]

TINY = 1e-300


class EstimatorKind(enum.Enum):
    MLE = 0
    JAMES_STEIN = 1
    HUDSON = 2
    SHRINKAGE = 3

    @property
    def label(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class EstimatorSpec:
    kind: EstimatorKind
    c: float | None = None
    a_star: float | None = None
    family_tag: FamilyTag | None = None

    def __post_init__(self):
        if self.kind is EstimatorKind.SHRINKAGE:
            if self.c is None or not self.c >= 0 or not math.isfinite(self.c):
                raise ConfigurationError(f"shrinkage needs a finite c >= 0, got {self.c}")
        elif self.c is not None:
            raise ConfigurationError(f"{self.kind.label} takes no shrinkage constant")

    @property
    def label(self) -> str:
        return self.kind.label

    def dominance_guaranteed(self, d: int) -> bool:
        """Whether ``0 < c < 2(d-1)a*`` so that dominance over the MLE is proven."""
        if self.kind is not EstimatorKind.SHRINKAGE or self.a_star is None:
            return False
        return 0 < self.c < 2 * (d - 1) * self.a_star

    @classmethod
    def shrink(cls, c: float, a_star: float | None = None, family_tag=None) -> "EstimatorSpec":
        return cls(EstimatorKind.SHRINKAGE, c=float(c), a_star=a_star, family_tag=family_tag)


MLE_SPEC = EstimatorSpec(EstimatorKind.MLE)
JAMES_STEIN_SPEC = EstimatorSpec(EstimatorKind.JAMES_STEIN)
HUDSON_SPEC = EstimatorSpec(EstimatorKind.HUDSON)


@dataclass(frozen=True)
class Estimate:
    delta: np.ndarray
    shrink_magnitude: np.ndarray | float
    fallback: np.ndarray | bool


def _obs(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim not in (1, 2) or arr.shape[-1] < 1:
        raise DomainError("observations must have shape (d,) or (n, d)")
    return arr


def _finish(x, step, fallback) -> Estimate:
    # magnitude from the step itself; delta - x would add the rounding of x
    delta = x - step
    size = np.linalg.norm(step, axis=-1)
    if x.ndim == 1:
        return Estimate(delta, float(size), bool(fallback))
    return Estimate(delta, size, np.asarray(fallback, dtype=bool))


def mle(x) -> Estimate:
    x = _obs(x)
    return _finish(x, np.zeros_like(x), np.zeros(x.shape[:-1], dtype=bool))


def james_stein(x) -> Estimate:
    """``(1 - (d-2)/||x||^2) x``, evaluated as ``x - ((d-2)/||x||^2) x``."""
    x = _obs(x)
    d = x.shape[-1]
    sq = np.sum(x * x, axis=-1)
    small = sq < TINY
    step = np.where(small, 0.0, (d - 2) / np.where(small, 1.0, sq))
    return _finish(x, step[..., None] * x, small)


def _stat_and_s(x, fam: FamilyDescriptor, log_x):
    stat = fam.stat(x, log_x)
    s = np.sum(stat * stat, axis=-1)
    return stat, s, s < TINY


def hudson(x, fam: FamilyDescriptor, log_x=None) -> Estimate:
    """``x - (d-2) b(x) / S``, applied in the family's natural variable."""
    x = _obs(x)
    d = x.shape[-1]
    stat, s, small = _stat_and_s(x, fam, log_x)
    step = np.where(small, 0.0, fam.sign * (d - 2) / np.where(small, 1.0, s))
    return _finish(x, step[..., None] * stat, small)


def shrinkage(x, fam: FamilyDescriptor, c: float, log_x=None) -> Estimate:
    """``x - c b(x) / sqrt(S)``; the step has Euclidean length exactly ``c``.

    For the exponential family the step is taken in ``y = -x`` and mapped
    back, which gives ``x - c x / ||x||``.
    """
    if not c >= 0:
        raise DomainError(f"c must be non-negative, got {c}")
    x = _obs(x)
    stat, s, small = _stat_and_s(x, fam, log_x)
    step = np.where(small, 0.0, fam.sign * c / np.sqrt(np.where(small, 1.0, s)))
    return _finish(x, step[..., None] * stat, small)


def a_star(family_tag: FamilyTag | str, space: ParameterSpace, d: int) -> float:
    """Lower bound on ``E[S^{-1/2}]`` over the parameter space, per family."""
    tag = FamilyTag(family_tag)
    if d < 2:
        raise ConfigurationError("a* is defined for d >= 2")
    if tag is FamilyTag.NORMAL_IID:
        return 1.0 / (space.tau + math.sqrt(d))
    if tag is FamilyTag.NORMAL_CORRELATED:
        if space.lambda_star is None:
            raise ConfigurationError("correlated normal needs lambda_star in the parameter space")
        return 1.0 / (space.tau + math.sqrt(d * space.lambda_star))
    if tag is FamilyTag.GAMMA:
        return special.gamma_a_star(space.comp_lo, space.comp_hi, d).a_star
    if space.comp_lo <= 0:
        raise ConfigurationError("exponential means must be bounded away from zero")
    return space.comp_lo / (math.sqrt(2.0) * space.comp_hi)


def optimal_c(d: int, a_star: float) -> float:
    """Vertex ``(d-1)a*`` of the risk-difference parabola."""
    if d < 2 or not a_star > 0:
        raise ConfigurationError("optimal c needs d >= 2 and a* > 0")
    return (d - 1) * a_star

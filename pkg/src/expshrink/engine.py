"""Replication loop: sample, estimate and score every replication of a cell.

Replications are cut into fixed-size blocks and dispatched to a thread pool;
each block writes its own slice of the per-replication buffers, so the result
is the same for any worker count.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _backend
from .distributions import FAMILY_CODES, CovarianceSpec
from .errors import ConfigurationError
from .estimators import EstimatorSpec
from .families import family

__all__ = ["BLOCK_SIZE", "SimulationResult", "simulate"]

BLOCK_SIZE = 2048


@dataclass(frozen=True)
class SimulationResult:
    losses: np.ndarray
    s: np.ndarray
    fallback: np.ndarray
    backend: str


def simulate(tag, theta, estimators: Sequence[EstimatorSpec], replications: int, master_seed: int,
             *, cov: CovarianceSpec | None = None, workers: int = 1,
             backend: str | None = None) -> SimulationResult:
    """Per-replication quadratic losses for ``estimators`` on common draws."""
    fam = family(tag)
    if replications < 1:
        raise ConfigurationError("replications must be positive")
    if workers < 1:
        raise ConfigurationError("workers must be positive")
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    chol = None
    if cov is not None:
        if cov.d != theta.size:
            raise ConfigurationError(f"covariance is {cov.d}x{cov.d} but d={theta.size}")
        chol = cov.chol
    elif FAMILY_CODES[fam.tag] == 1:
        raise ConfigurationError("correlated normal needs a covariance")
    name = _backend.default_backend() if backend in (None, "auto") else backend
    kernels = _backend.get_kernels(name)
    code = FAMILY_CODES[fam.tag]
    kinds = np.array([e.kind.value for e in estimators], dtype=np.int_)
    cs = np.array([e.c or 0.0 for e in estimators], dtype=np.float64)

    losses = np.empty((replications, len(estimators)))
    s = np.empty(replications)
    fallback = np.empty((replications, len(estimators)), dtype=np.uint8)

    def run(start: int) -> None:
        n = min(BLOCK_SIZE, replications - start)
        block = kernels.simulate_block(code, theta, chol, master_seed, start, n, kinds, cs, fam.sign)
        losses[start:start + n], s[start:start + n], fallback[start:start + n] = block

    starts = range(0, replications, BLOCK_SIZE)
    if workers == 1 or len(starts) == 1:
        for start in starts:
            run(start)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, starts))
    return SimulationResult(losses, s, fallback.astype(bool), name)

"""Counter-based random streams keyed by (master_seed, replication).

The k-th uniform of a stream is a pure function of ``(master_seed,
replication, k)``, so any replication can be regenerated on its own and
parallel runs are reproducible regardless of how work is scheduled. Both
simulation backends implement exactly this bit recipe:

* ``key = mix64(mix64(seed ^ SEED_SALT) + GOLDEN * (replication + 1))``
* ``bits(k) = mix64(key ^ mix64(GOLDEN * (k + 1)))``
* ``u(k) = ((bits(k) >> 12) + 0.5) * 2**-52``, which lies strictly in (0, 1)

``mix64`` is the SplitMix64 finaliser. Samplers address uniforms as
``k = (component << 32) | slot``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BOOST_SLOT",
    "GOLDEN",
    "RngStream",
    "counter",
    "mix64",
    "rng_stream",
    "stream_keys",
    "uniforms",
]

GOLDEN = 0x9E3779B97F4A7C15
SEED_SALT = 0x5851F42D4C957F2D
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_U64_MAX = (1 << 64) - 1
COMPONENT_SHIFT = 32
# slot reserved for the shape-boost uniform of the Gamma sampler
BOOST_SLOT = 0xFFFFFFFF
_TWO_M52 = 2.0**-52


def mix64(z) -> np.ndarray:
    z = np.array(z, dtype=np.uint64, copy=True, ndmin=1)
    with np.errstate(over="ignore"):
        z ^= z >> np.uint64(30)
        z *= _M1
        z ^= z >> np.uint64(27)
        z *= _M2
        z ^= z >> np.uint64(31)
    return z


def _check_seed(master_seed: int) -> int:
    seed = int(master_seed)
    if not 0 <= seed <= _U64_MAX:
        raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {master_seed}")
    return seed


def stream_keys(master_seed: int, replications) -> np.ndarray:
    """Stream keys for an array of replication indices."""
    seed = _check_seed(master_seed)
    base = mix64(seed ^ SEED_SALT)
    reps = np.asarray(replications, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(base + np.uint64(GOLDEN) * (reps + np.uint64(1)))


def counter(component, slot) -> np.ndarray:
    comp = np.asarray(component, dtype=np.uint64)
    return (comp << np.uint64(COMPONENT_SHIFT)) | np.asarray(slot, dtype=np.uint64)


def _counter_hash(counters) -> np.ndarray:
    c = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(np.uint64(GOLDEN) * (c + np.uint64(1))).reshape(c.shape)


def uniforms(keys, counters) -> np.ndarray:
    """Uniforms for broadcastable arrays of stream keys and counters."""
    bits = mix64(np.bitwise_xor(np.asarray(keys, dtype=np.uint64), _counter_hash(counters)))
    bits = bits.reshape(np.broadcast_shapes(np.shape(keys), np.shape(counters)))
    return ((bits >> np.uint64(12)).astype(np.float64) + 0.5) * _TWO_M52


@dataclass
class RngStream:
    """One replication's stream. Single-owner: do not share between tasks."""

    master_seed: int
    stream_index: int
    position: int = field(default=0)

    def __post_init__(self):
        self.master_seed = _check_seed(self.master_seed)
        if self.stream_index < 0:
            raise ValueError("stream_index must be non-negative")

    @property
    def key(self) -> np.uint64:
        return stream_keys(self.master_seed, [self.stream_index])[0]

    def uniform_at(self, component, slot) -> np.ndarray:
        return uniforms(self.key, counter(component, slot))

    def random(self, n: int) -> np.ndarray:
        """Next ``n`` uniforms from the flat counter sequence."""
        out = uniforms(self.key, np.arange(self.position, self.position + n, dtype=np.uint64))
        self.position += n
        return out


def rng_stream(master_seed: int, replication: int) -> RngStream:
    return RngStream(master_seed, replication)

"""Counter-based random streams.

Every uniform variate is a pure function of (seed, window, entity, draw), so a
window can be evaluated in any order, alone or inside a vectorized batch, and
produce the same numbers. The mixer is the SplitMix64 finalizer.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1
_TO_UNIT = 2.0 ** -53


def _mix(z):
    z = z ^ (z >> np.uint64(30))
    z = z * _M1
    z = z ^ (z >> np.uint64(27))
    z = z * _M2
    return z ^ (z >> np.uint64(31))


def counter_uniform(seed: int, window, entity, draw) -> np.ndarray:
    """Uniform [0, 1) variates for broadcastable integer index arrays."""
    with np.errstate(over="ignore"):
        key = _mix(np.uint64(int(seed) & _MASK64) + _GOLDEN)
        w = np.asarray(window, dtype=np.uint64)
        e = np.asarray(entity, dtype=np.uint64)
        d = np.asarray(draw, dtype=np.uint64)
        z = _mix(key ^ (w * _GOLDEN + np.uint64(1)))
        z = _mix(z ^ ((e << np.uint64(32)) | d))
    return (z >> np.uint64(11)).astype(np.float64) * _TO_UNIT


class CounterStream:
    """Sequential view of one (seed, window, entity) stream.

    Quacks like the subset of ``numpy.random.Generator`` the samplers use.
    """

    def __init__(self, seed: int, window: int, entity: int):
        self.seed = int(seed)
        self.window = int(window)
        self.entity = int(entity)
        self._next = 0

    def random(self, size=None):
        n = 1 if size is None else int(size)
        out = counter_uniform(self.seed, self.window, self.entity,
                              np.arange(self._next, self._next + n, dtype=np.uint64))
        self._next += n
        return float(out[0]) if size is None else out


class WindowStreams:
    """Factory of per-entity streams for one window of a seeded run."""

    def __init__(self, seed: int, window: int):
        self.seed = int(seed)
        self.window = int(window)

    def entity(self, index: int) -> CounterStream:
        return CounterStream(self.seed, self.window, index)

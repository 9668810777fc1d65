"""Counter-based SplitMix64 generator.

Draw ``i`` (0-based) of a stream with 64-bit seed ``s`` is::

    z = s + (i + 1) * 0x9E3779B97F4A7C15            (mod 2**64)
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9        (mod 2**64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB        (mod 2**64)
    z =  z ^ (z >> 31)
    u = ((z >> 11) + 0.5) / 2**53                   in (0, 1)

Child stream ``j`` of seed ``s`` uses seed ``mix(s ^ mix(j + 1))`` where
``mix`` is the three finalizer lines above applied to a single word.
Every step is plain 64-bit integer arithmetic, so sequences can be
reproduced bit for bit in other languages.
"""
from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def mix64(x: int) -> int:
    return int(_mix(np.array([x & _MASK], dtype=np.uint64))[0])


class CounterRNG:
    """Stateful cursor over a SplitMix64 stream."""

    def __init__(self, seed: int = 0):
        self.seed = int(seed) & _MASK
        self.counter = 0

    def raw(self, n: int) -> np.ndarray:
        idx = np.arange(self.counter + 1, self.counter + 1 + n, dtype=np.uint64)
        self.counter += n
        with np.errstate(over="ignore"):
            return _mix(np.uint64(self.seed) + idx * _GOLDEN)

    def uniform(self, n: int) -> np.ndarray:
        z = self.raw(int(n))
        return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53

    def integers(self, high: int, n: int) -> np.ndarray:
        """``n`` integers uniform on ``0 .. high-1``."""
        if high < 1:
            raise ValueError("high must be >= 1")
        return np.minimum((self.uniform(n) * high).astype(np.int64), high - 1)

    def normal(self, n: int) -> np.ndarray:
        """Box-Muller normals; consumes ``2n`` uniforms."""
        u = self.uniform(2 * int(n)).reshape(2, -1)
        return np.sqrt(-2.0 * np.log(u[0])) * np.cos(2.0 * np.pi * u[1])

    def spawn(self, j: int) -> "CounterRNG":
        return CounterRNG(mix64(self.seed ^ mix64(j + 1)))


def as_rng(seed) -> CounterRNG:
    return seed if isinstance(seed, CounterRNG) else CounterRNG(0 if seed is None else seed)

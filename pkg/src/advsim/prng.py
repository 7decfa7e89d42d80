"""Named, counter-addressed SplitMix64 random streams.

Every stochastic decision in a run draws from a stream identified by
``(seed, name)``. A stream is random access: draw ``i`` depends only on the
stream key and ``i``, so results never depend on evaluation order or on how
work is split between workers.

Key derivation::

    key = mix64(seed ^ fnv1a64(name))
    draw(i) = mix64(key + (i + 1) * 0x9E3779B97F4A7C15)   (mod 2**64)

where ``mix64`` is the SplitMix64 output finalizer.
"""

from __future__ import annotations

import numpy as np

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a64(text: str) -> int:
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & MASK64
    return h


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = np.array(z, dtype=np.uint64, copy=True)
    with np.errstate(over="ignore"):
        z ^= z >> np.uint64(30)
        z *= np.uint64(0xBF58476D1CE4E5B9)
        z ^= z >> np.uint64(27)
        z *= np.uint64(0x94D049BB133111EB)
        z ^= z >> np.uint64(31)
    return z


class Stream:
    """A deterministic random stream keyed by ``(seed, name)``."""

    def __init__(self, seed: int, name: str):
        self.seed = int(seed) & MASK64
        self.name = name
        self.key = mix64(self.seed ^ fnv1a64(name))

    def __repr__(self) -> str:
        return f"Stream(seed={self.seed}, name={self.name!r})"

    def child(self, suffix: str | int) -> "Stream":
        return Stream(self.seed, f"{self.name}/{suffix}")

    def uint64(self, counter) -> np.ndarray:
        """Raw 64-bit draws at the given counter position(s)."""
        c = np.asarray(counter, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.key) + (c + np.uint64(1)) * np.uint64(GOLDEN_GAMMA)
        return _mix64_array(z)

    def uniform(self, counter, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        """Uniform floats in ``[low, high)`` built from the top 53 bits."""
        bits = self.uint64(counter) >> np.uint64(11)
        u = bits.astype(np.float64) * (1.0 / (1 << 53))
        return low + (high - low) * u

    def integers(self, counter, n: int) -> np.ndarray:
        """Integers in ``[0, n)`` (modulo reduction; bias is below 2**-50 for small n)."""
        if n <= 0:
            raise ValueError("n must be positive")
        return (self.uint64(counter) % np.uint64(n)).astype(np.int64)

"""Deterministic xorshift64* pseudo-random generator.

Every piece of reproducible randomness in the package (parameter
initialization, verification probes, demo states) flows through this one
generator, so golden values survive reimplementation in any language.

The step is the classic xorshift64* recipe, all arithmetic mod 2**64:

    x ^= x >> 12
    x ^= x << 25
    x ^= x >> 27
    output = x * 0x2545F4914F6CDD1D

A zero seed is replaced by a fixed nonzero constant because the all-zero
state is a fixed point of the xorshift step.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1
_MULT = 0x2545F4914F6CDD1D
_ZERO_SEED_STATE = 0x9E3779B97F4A7C15


class Xorshift64Star:
    """Seeded xorshift64* stream with uniform and normal float64 draws."""

    def __init__(self, seed: int) -> None:
        state = seed & _MASK
        self._state = state if state != 0 else _ZERO_SEED_STATE
        self._spare_normal: float | None = None

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x = (x ^ (x << 25)) & _MASK
        x ^= x >> 27
        self._state = x
        return (x * _MULT) & _MASK

    def uniform(self, low: float = 0.0, high: float = 1.0) -> float:
        """Uniform draw in [low, high) from the 53 high output bits."""
        u = self.next_u64() >> 11
        return low + (high - low) * (u * 2.0**-53)

    def normal(self) -> float:
        """Standard normal draw via Box-Muller; one transform per two uniforms.

        The log argument is mapped to (0, 1] so it never hits zero.
        """
        if self._spare_normal is not None:
            z = self._spare_normal
            self._spare_normal = None
            return z
        u1 = ((self.next_u64() >> 11) + 1) * 2.0**-53
        u2 = (self.next_u64() >> 11) * 2.0**-53
        r = math.sqrt(-2.0 * math.log(u1))
        theta = 2.0 * math.pi * u2
        self._spare_normal = r * math.sin(theta)
        return r * math.cos(theta)

    def uniform_array(self, n: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        return np.array([self.uniform(low, high) for _ in range(n)], dtype=np.float64)

    def normal_array(self, n: int) -> np.ndarray:
        return np.array([self.normal() for _ in range(n)], dtype=np.float64)

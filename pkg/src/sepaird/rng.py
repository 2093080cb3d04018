"""Deterministic random stream shared by every stochastic component.

All randomness in a simulation run flows through one :class:`RngStream`,
seeded from a 64-bit integer.  The generator is pinned to numpy's PCG64
(a fixed, documented algorithm) rather than any platform default, so two
streams built from the same seed produce bitwise-identical draw sequences
on every platform.

Replication seeds for parameter sweeps are derived with :func:`derive_seed`,
a splitmix64/FNV-1a mix over the scenario content, so adding scenarios to a
grid never perturbs the seeds of existing ones.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


class RngStream:
    """PCG64-backed stream with the draw primitives the simulator needs."""

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self, size=None):
        """Uniform draw(s) on [0, 1)."""
        return self._gen.random(size)

    def bernoulli(self, p: float) -> bool:
        """Single success/failure draw with probability ``p``."""
        return bool(self._gen.random() < p)

    def normal(self, loc, scale, size=None):
        """Gaussian draw(s); ``loc``/``scale`` may be arrays."""
        return self._gen.normal(loc, scale, size)

    def integers(self, low: int, high: int, size=None):
        """Uniform integer draw(s) on [low, high)."""
        return self._gen.integers(low, high, size=size)

    def choice_index(self, n: int) -> int:
        """Uniform index on [0, n)."""
        return int(self._gen.integers(0, n))


def splitmix64(x: int) -> int:
    """One splitmix64 scrambling round (public-domain constants)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash of ``data``."""
    h = 0xCBF29CE484222325
    for byte in data:
        h = ((h ^ byte) * 0x100000001B3) & _MASK64
    return h


def derive_seed(base_seed: int, scenario_key: str, replication: int) -> int:
    """Stable per-run seed for (scenario, replication).

    The scenario is identified by its canonical key string, hashed with
    FNV-1a and mixed with the replication index through splitmix64, so the
    derived seed depends only on scenario content and replication index.
    """
    h = fnv1a64(scenario_key.encode("utf-8"))
    mixed = splitmix64(h ^ splitmix64(replication & _MASK64))
    return (base_seed + mixed) & _MASK64

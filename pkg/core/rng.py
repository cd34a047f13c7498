from dataclasses import dataclass

import numpy as np

from core.errors import InputError

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One SplitMix64 output step; a bijection on 64-bit integers."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix64(seed: int, index: int) -> int:
    """Stream key of a (seed, index) pair: ``splitmix64(seed XOR splitmix64(index))``."""
    return splitmix64((seed & MASK64) ^ splitmix64(index & MASK64))


@dataclass(frozen=True)
class RngStreamSpec:
    """Names one reproducible random stream.

    Replicate ``i`` of an experiment seeded with ``s`` always draws from
    ``RngStreamSpec(s, i)``, so replicates can run in any order or in separate
    processes and still produce the same numbers.
    """

    seed: int
    index: int = 0

    def __post_init__(self):
        if not (0 <= self.seed <= MASK64) or not (0 <= self.index <= MASK64):
            raise InputError("seed and stream index must be unsigned 64-bit integers")

    @property
    def key(self) -> int:
        return mix64(self.seed, self.index)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.key))

    def child(self, index: int) -> "RngStreamSpec":
        return RngStreamSpec(self.seed, index)

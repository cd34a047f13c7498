import logging
import math
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import numpy as np

from core.errors import InputError, ResourceError

logger = logging.getLogger(__name__)

# Largest numerator or denominator allowed while powering.
DEFAULT_BIT_RAIL = 1_000_000


class RationalMatrix:
    """Square matrix of exact rationals stored as integer numerators over one denominator.

    Products never reduce: (N1/D1)(N2/D2) = (N1 N2)/(D1 D2).  With every entry
    sharing a denominator, row sums compare against 1 by comparing integer
    numerator sums with the denominator.
    """

    def __init__(self, numerators: np.ndarray, denominator: int = 1):
        numerators = np.asarray(numerators, dtype=object)
        if numerators.ndim != 2 or numerators.shape[0] != numerators.shape[1]:
            raise InputError(f"matrix must be square, got shape {numerators.shape}")
        if denominator <= 0:
            raise InputError("denominator must be positive")
        self.numerators = numerators
        self.denominator = int(denominator)

    @classmethod
    def from_fractions(cls, rows: Sequence[Sequence[Fraction]]) -> "RationalMatrix":
        rows = [[Fraction(v) for v in row] for row in rows]
        d = math.lcm(*(v.denominator for row in rows for v in row)) if rows else 1
        nums = np.array([[v.numerator * (d // v.denominator) for v in row] for row in rows], dtype=object)
        return cls(nums.reshape(len(rows), len(rows)), d)

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        nums = np.zeros((n, n), dtype=object)
        for i in range(n):
            nums[i, i] = 1
        return cls(nums, 1)

    @property
    def n(self) -> int:
        return self.numerators.shape[0]

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if other.n != self.n:
            raise InputError(f"dimension mismatch {self.n} vs {other.n}")
        return RationalMatrix(np.dot(self.numerators, other.numerators), self.denominator * other.denominator)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalMatrix) or other.n != self.n:
            return NotImplemented
        return bool(np.all(self.numerators * other.denominator == other.numerators * self.denominator))

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return Fraction(int(self.numerators[i, j]), self.denominator)

    def to_fractions(self) -> List[List[Fraction]]:
        return [[Fraction(int(v), self.denominator) for v in row] for row in self.numerators]

    def to_float(self) -> np.ndarray:
        d = self.denominator
        return np.array([[int(v) / d for v in row] for row in self.numerators], dtype=float)

    def is_nonnegative(self) -> bool:
        return all(v >= 0 for v in self.numerators.flat)

    def bit_size(self) -> int:
        return max(self.denominator.bit_length(), max(abs(int(v)).bit_length() for v in self.numerators.flat))

    def row_sum_numerators(self) -> List[int]:
        return [int(sum(row)) for row in self.numerators]

    def row_sums(self) -> List[Fraction]:
        return [Fraction(s, self.denominator) for s in self.row_sum_numerators()]

    def max_row_sum(self) -> Fraction:
        return Fraction(max(self.row_sum_numerators()), self.denominator)

    def reduced(self) -> "RationalMatrix":
        g = math.gcd(self.denominator, *(int(v) for v in self.numerators.flat))
        if g == 1:
            return self
        return RationalMatrix(np.array([[int(v) // g for v in row] for row in self.numerators], dtype=object), self.denominator // g)

    def power(self, e: int, bit_rail: Optional[int] = DEFAULT_BIT_RAIL) -> "RationalMatrix":
        """self**e by square-and-multiply, checking the bit rail after every product."""
        if e < 0:
            raise InputError(f"exponent must be >= 0, got {e}")
        result = RationalMatrix.identity(self.n)
        base = self
        done = 0
        for bit in range(e.bit_length()):
            if (e >> bit) & 1:
                result = result @ base
                done |= 1 << bit
                _check_rail(result, bit_rail, done, e)
            if bit + 1 < e.bit_length():
                base = base @ base
                _check_rail(base, bit_rail, done, e)
        return result

    def __pow__(self, e: int) -> "RationalMatrix":
        return self.power(e)

    def naive_power(self, e: int) -> "RationalMatrix":
        result = RationalMatrix.identity(self.n)
        for _ in range(e):
            result = result @ self
        return result


def _check_rail(m: RationalMatrix, bit_rail: Optional[int], done: int, e: int) -> None:
    if bit_rail is None:
        return
    bits = m.bit_size()
    if bits > bit_rail:
        diagnostics: Dict = {"power_target": e, "power_accumulated": done, "bits": bits, "bit_rail": bit_rail}
        logger.warning("bit rail exceeded: %s", diagnostics)
        raise ResourceError(f"entry size {bits} bits exceeds the rail of {bit_rail} bits", diagnostics)

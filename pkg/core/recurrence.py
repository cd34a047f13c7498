import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import BoundError, ContractViolation, DomainError, InputError

# recurrence.py: the generating-function operator
#
#   A g(x) = (x+2)/3 * g((x+1)/2)^2 + (x+1)/3 * g(x/2) * (1 - g((x+1)/2))
#
# its iterates from g0 = 1, and the Poisson bound e^{a_n (x-1)} that drives
# them to 0.  A^n g0(x) only ever needs values at the dyadic shifts
# (x+j)/2^m, so iterates are computed level by level over that argument tree.

logger = logging.getLogger(__name__)

Number = Union[Fraction, float]
EXACT_ITERATE_MAX = 24
FLOAT_TOLERANCE = 1e-12


class ArithmeticMode(Enum):
    EXACT = "exact"
    FLOAT = "float"


def _check_unit(x: Number, what: str) -> None:
    if not 0 <= x <= 1:
        raise DomainError(f"{what} must lie in [0, 1], got {x}")


def apply_A(g: Callable[[Number], Number], x: Number) -> Number:
    """One application of the operator at ``x``; exact when ``x`` and ``g`` are rational."""
    _check_unit(x, "x")
    hi = g((x + 1) / 2)
    lo = g(x / 2)
    for value in (hi, lo):
        if not 0 <= value <= 1:
            raise ContractViolation(f"g returned {value}, outside [0, 1]")
    return (x + 2) / 3 * hi * hi + (x + 1) / 3 * lo * (1 - hi)


# ----------------------------------------------------------------------
# Dyadic tables
# ----------------------------------------------------------------------

class DyadicFunctionTable:
    """Values of A^(n-m) g0 at the arguments (x+j)/2^m for 0 <= m <= n, 0 <= j < 2^m.

    Float mode keeps one float64 array per level.  Exact mode keeps one object
    array of integer numerators per level over a shared level denominator; no
    fraction is reduced until a value is read, so deep tables stay affordable.
    The table is immutable once built.
    """

    def __init__(self, n: int, x: Number, mode: ArithmeticMode = ArithmeticMode.EXACT):
        if n < 0:
            raise BoundError(f"depth must be >= 0, got {n}")
        _check_unit(x, "x")
        if mode is ArithmeticMode.EXACT:
            if n > EXACT_ITERATE_MAX:
                raise BoundError(f"exact tables are limited to depth {EXACT_ITERATE_MAX}, got {n}")
            x = Fraction(x)
        else:
            x = float(x)
        self.n = n
        self.x = x
        self.mode = mode
        self._levels: List[np.ndarray] = [None] * (n + 1)
        self._denominators: List[int] = [1] * (n + 1)
        if mode is ArithmeticMode.EXACT:
            self._build_exact()
        else:
            self._build_float()

    def _build_float(self) -> None:
        n = self.n
        self._levels[n] = np.ones(1 << n)
        for m in range(n - 1, -1, -1):
            below = self._levels[m + 1]
            half = 1 << m
            lo, hi = below[:half], below[half:]
            t = (self.x + np.arange(half)) / half
            self._levels[m] = (t + 2) / 3 * hi * hi + (t + 1) / 3 * lo * (1 - hi)

    def _build_exact(self) -> None:
        n = self.n
        p, r = self.x.numerator, self.x.denominator
        self._levels[n] = np.full(1 << n, 1, dtype=object)
        for m in range(n - 1, -1, -1):
            below = self._levels[m + 1]
            d = self._denominators[m + 1]
            half = 1 << m
            lo, hi = below[:half], below[half:]
            e = r * half
            t = np.array([p + j * r for j in range(half)], dtype=object)
            self._levels[m] = (t + 2 * e) * hi * hi + (t + e) * lo * (d - hi)
            self._denominators[m] = 3 * e * d * d

    @property
    def size(self) -> int:
        return sum(len(level) for level in self._levels)

    def argument(self, m: int, j: int) -> Number:
        return (self.x + j) / (1 << m)

    def locate(self, t: Number) -> Tuple[int, int]:
        """(m, j) of the shallowest stored argument equal to ``t``."""
        for m in range(self.n + 1):
            j = t * (1 << m) - self.x
            if j == int(j) and 0 <= j < (1 << m):
                return m, int(j)
        raise InputError(f"{t} is not a dyadic shift of {self.x} within depth {self.n}")

    def value(self, m: int = 0, j: int = 0) -> Number:
        if self.mode is ArithmeticMode.FLOAT:
            return float(self._levels[m][j])
        return Fraction(int(self._levels[m][j]), self._denominators[m])

    def float_value(self, m: int = 0, j: int = 0) -> float:
        if self.mode is ArithmeticMode.FLOAT:
            return float(self._levels[m][j])
        return int(self._levels[m][j]) / self._denominators[m]

    def le(self, bound: float, m: int = 0, j: int = 0) -> bool:
        """value(m, j) <= bound, decided exactly in exact mode."""
        if self.mode is ArithmeticMode.FLOAT:
            return float(self._levels[m][j]) <= bound
        b = Fraction(bound)
        return int(self._levels[m][j]) * b.denominator <= b.numerator * self._denominators[m]

    def in_unit_interval(self) -> bool:
        for m, level in enumerate(self._levels):
            if self.mode is ArithmeticMode.FLOAT:
                if level.min() < 0 or level.max() > 1:
                    return False
            elif any(v < 0 or v > self._denominators[m] for v in level):
                return False
        return True


def iterate_A(n: int, x: Number, mode: ArithmeticMode = ArithmeticMode.EXACT) -> Number:
    """A^n g0(x) with g0 = 1; a Fraction in exact mode, a float otherwise."""
    return DyadicFunctionTable(n, x, mode).value()


def iterate_fn(n: int, mode: ArithmeticMode = ArithmeticMode.EXACT) -> Callable[[Number], Number]:
    return lambda t: iterate_A(n, t, mode)


# ----------------------------------------------------------------------
# Poisson bounds
# ----------------------------------------------------------------------

def c_of_a(a: float) -> float:
    """Increment of the Poisson bound: e^{-2}/3 up to a = 4, e^{-a/2}/3 beyond."""
    if a < 0:
        raise DomainError(f"a must be >= 0, got {a}")
    return math.exp(-2) / 3 if a <= 4 else math.exp(-a / 2) / 3


@dataclass(frozen=True)
class PoissonBoundSeq:
    values: np.ndarray
    increments: np.ndarray

    @property
    def n(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, m: int) -> float:
        return float(self.values[m])


def poisson_seq(n: int) -> PoissonBoundSeq:
    """a_0 = 0, a_{m+1} = a_m + c(a_m) for m < n."""
    if n < 0:
        raise InputError(f"n must be >= 0, got {n}")
    values = np.empty(n + 1)
    increments = np.empty(n)
    a = 0.0
    values[0] = a
    for m in range(n):
        c = c_of_a(a)
        increments[m] = c
        a = a + c
        values[m + 1] = a
    return PoissonBoundSeq(values=values, increments=increments)


def g_poisson(a: float) -> Callable[[float], float]:
    """Generating function e^{a(x-1)} of a Poisson(a) law."""
    return lambda x: math.exp(a * (x - 1))


def r_factor(b: float, x: float) -> float:
    """The factor with A g_a = g_a * r_{a/2}: (2+x)/3 + (1+x)/3 * (e^{-bx} - e^{-b})."""
    return (2 + x) / 3 + (1 + x) / 3 * (math.exp(-b * x) - math.exp(-b))


def r_nonmonotone_witness(b: float, grid: Sequence[float]) -> Optional[Tuple[float, float]]:
    """First grid pair x1 < x2 with r_b(x1) > r_b(x2), or None if r_b is nondecreasing there."""
    pts = sorted(grid)
    for x1, x2 in zip(pts, pts[1:]):
        if r_factor(b, x1) > r_factor(b, x2):
            return x1, x2
    return None


# ----------------------------------------------------------------------
# Property checks
# ----------------------------------------------------------------------

def sixteenths() -> List[Fraction]:
    return [Fraction(j, 16) for j in range(17)]


def dyadic_grid(depth: int) -> List[Fraction]:
    return [Fraction(j, 1 << depth) for j in range((1 << depth) + 1)]


def grid_closure(grid: Sequence[Number], depth: int = 1) -> List[Number]:
    """``grid`` closed under t -> t/2 and t -> (t+1)/2, ``depth`` times."""
    points = set(grid)
    frontier = set(grid)
    for _ in range(depth):
        frontier = {t / 2 for t in frontier} | {(t + 1) / 2 for t in frontier}
        points |= frontier
    return sorted(points)


@dataclass
class OperatorReport:
    ok: bool
    max_violation: float
    worst_x: Optional[Number] = None
    details: Dict = field(default_factory=dict)


def _nondecreasing_violation(values: Sequence[Number]) -> float:
    return max((float(a - b) for a, b in zip(values, values[1:])), default=0.0)


def check_monotone_operator(g, h, grid: Sequence[Number], tol: float = FLOAT_TOLERANCE) -> OperatorReport:
    """Verify A g <= A h on ``grid`` for nondecreasing g <= h."""
    closure = grid_closure(grid)
    gv = [g(t) for t in closure]
    hv = [h(t) for t in closure]
    if any(a > b + tol for a, b in zip(gv, hv)):
        raise InputError("g <= h fails on the closure of the grid")
    if _nondecreasing_violation(gv) > tol or _nondecreasing_violation(hv) > tol:
        raise InputError("g and h must be nondecreasing on the closure of the grid")

    worst, worst_x = -math.inf, None
    for x in grid:
        gap = float(apply_A(g, x) - apply_A(h, x))
        if gap > worst:
            worst, worst_x = gap, x
    return OperatorReport(ok=worst <= tol, max_violation=max(worst, 0.0), worst_x=worst_x)


def check_closure(g, grid: Sequence[Number], tol: float = FLOAT_TOLERANCE) -> OperatorReport:
    """Verify A g maps into [0, 1] and is nondecreasing on ``grid``."""
    pts = sorted(grid)
    values = [apply_A(g, x) for x in pts]
    low, high = min(values), max(values)
    decrease = _nondecreasing_violation(values)
    outside = max(float(-low), float(high - 1), 0.0)
    return OperatorReport(
        ok=decrease <= tol and outside <= tol,
        max_violation=max(decrease, outside),
        details={"min": float(low), "max": float(high)},
    )


@dataclass
class PoissonReport:
    n: int
    a_n: float
    min_slack: float
    worst_x: Optional[Number]
    violations: int
    exact_points: Dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.violations == 0 and all(self.exact_points.values())

    def to_dict(self) -> Dict:
        return {
            "n": self.n,
            "a_n": self.a_n,
            "min_slack": self.min_slack,
            "worst_x": str(self.worst_x),
            "violations": self.violations,
            "exact_points": dict(self.exact_points),
            "ok": self.ok,
        }


def poisson_domination_check(
    n: int,
    grid: Optional[Sequence[Number]] = None,
    exact_points: Sequence[Fraction] = (),
    tol: float = FLOAT_TOLERANCE,
) -> PoissonReport:
    """Check A^n g0(x) <= e^{a_n (x-1)} on the grid (float) and at ``exact_points`` (exact)."""
    if not 0 <= n <= 20:
        raise BoundError(f"domination checks run for n <= 20, got {n}")
    grid = sixteenths() if grid is None else grid
    a_n = poisson_seq(n)[n]

    min_slack, worst_x, violations = math.inf, None, 0
    for x in grid:
        bound = math.exp(a_n * (float(x) - 1))
        slack = bound - DyadicFunctionTable(n, x, ArithmeticMode.FLOAT).value()
        if slack < min_slack:
            min_slack, worst_x = slack, x
        if slack < -tol:
            violations += 1

    report = PoissonReport(n=n, a_n=a_n, min_slack=min_slack, worst_x=worst_x, violations=violations)
    for x in exact_points:
        bound = math.exp(a_n * (float(x) - 1))
        report.exact_points[f"{Fraction(x).numerator}/{Fraction(x).denominator}"] = (
            DyadicFunctionTable(n, x, ArithmeticMode.EXACT).le(bound)
        )
    logger.debug("poisson domination n=%d: min slack %.3e", n, min_slack)
    return report


def check_poisson_step(a: float, grid: Sequence[float], tol: float = FLOAT_TOLERANCE) -> OperatorReport:
    """Verify A g_a <= g_{a + c(a)} on ``grid``."""
    g = g_poisson(a)
    target = g_poisson(a + c_of_a(a))
    worst, worst_x = -math.inf, None
    for x in grid:
        gap = apply_A(g, float(x)) - target(float(x))
        if gap > worst:
            worst, worst_x = gap, x
    return OperatorReport(ok=worst <= tol, max_violation=max(worst, 0.0), worst_x=worst_x)

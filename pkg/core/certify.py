import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from core.errors import InputError, NumericError
from core.laurent import Y, LaurentPoly, TypedMatrix, eval_matrix
from core.rational_matrix import DEFAULT_BIT_RAIL, RationalMatrix
from core.two_step import ParticleType, SplitRule, all_types, enumerate_two_step

# certify.py: transience certificates for branching random walks that dominate
# the frog model.  A nonnegative matrix whose e-th power has every row sum
# below 1 has spectral radius below 1; everything here that decides pass/fail
# is exact.
#
#   cert = power_rowsum_certificate(eval_matrix(phi6_matrix(), Fraction(1, 3)), 66)
#   cert.passed  # True

logger = logging.getLogger(__name__)

DEFAULT_Y = Fraction(1, 3)
POWER_ITERATION_TOL = 1e-9
POWER_ITERATION_CAP = 200_000


# ----------------------------------------------------------------------
# Single-type criterion on the d-ary tree
# ----------------------------------------------------------------------

def mu_simple(d: int, theta: float) -> float:
    """Mean weight of one step: e^theta/(d+1) + 2d e^{-theta}/(d+1)."""
    if d < 2:
        raise InputError(f"d must be >= 2, got {d}")
    return math.exp(theta) / (d + 1) + 2 * d * math.exp(-theta) / (d + 1)


def theta_star(d: int) -> Tuple[float, float]:
    """Minimizer log(2d)/2 of mu_simple and the minimum 2 sqrt(2d)/(d+1)."""
    if d < 2:
        raise InputError(f"d must be >= 2, got {d}")
    return math.log(2 * d) / 2, 2 * math.sqrt(2 * d) / (d + 1)


def single_type_transient(d: int) -> bool:
    """mu* < 1, i.e. d > 3 + 2 sqrt(2), decided in integers: (d+1)^2 > 8d."""
    return (d + 1) ** 2 > 8 * d


def mu_table(d_max: int) -> List[Dict]:
    rows = []
    for d in range(2, d_max + 1):
        theta, mu = theta_star(d)
        rows.append({"d": d, "theta_star": theta, "mu_star": mu, "transient": single_type_transient(d)})
    return rows


# ----------------------------------------------------------------------
# The 6-type matrix for the alternating 5/6 tree
# ----------------------------------------------------------------------

PHI6_LABELS = ("F5", "D5", "B5", "F6", "D6", "B6")


def phi6_matrix() -> TypedMatrix:
    """Mean matrix in y = e^{-theta}; a y^1 term is a child one level deeper."""
    y, R = Y, sympy.Rational
    exprs = [
        [0, 0, 0, 0, R(5, 6) * y, R(1, 6) / y],
        [0, 0, 0, R(5, 36) * y, R(1, 36) / y + R(55, 36) * y, R(5, 18) / y],
        [0, 0, 0, R(1, 6) * y, R(2, 3) * y, R(1, 6) / y],
        [0, R(6, 7) * y, R(1, 7) / y, 0, 0, 0],
        [R(6, 49) * y, R(1, 49) / y + R(78, 49) * y, R(12, 49) / y, 0, 0, 0],
        [R(1, 7) * y, R(5, 7) * y, R(1, 7) / y, 0, 0, 0],
    ]
    rows = [[LaurentPoly.from_expr(e) for e in row] for row in exprs]
    return TypedMatrix("phi6", PHI6_LABELS, rows, band=(-1, 1))


# ----------------------------------------------------------------------
# The 27-type matrix for the 5-ary tree
# ----------------------------------------------------------------------

def phi_row(t: ParticleType, rule: SplitRule = SplitRule.SHARED) -> List[LaurentPoly]:
    """Row t: entry j is the sum over outcomes of probability x (type-j children at displacement e) y^e."""
    acc: List[Dict[int, Fraction]] = [dict() for _ in range(27)]
    for outcome in enumerate_two_step(t, rule):
        for child, disp in outcome.children:
            cell = acc[child.index]
            cell[disp] = cell.get(disp, Fraction(0)) + outcome.probability
    return [LaurentPoly(cell) for cell in acc]


def _phi_row_job(job: Tuple[int, str]) -> List[LaurentPoly]:
    i, rule = job
    return phi_row(ParticleType.from_index(i), SplitRule(rule))


def build_phi27(rule: SplitRule = SplitRule.SHARED, parallel: int = 1) -> TypedMatrix:
    """27x27 mean matrix generated from the two-step enumeration of every type."""
    jobs = [(t.index, rule.value) for t in all_types()]
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as ex:
            rows = list(ex.map(_phi_row_job, jobs))
    else:
        rows = [_phi_row_job(job) for job in jobs]
    logger.info("built phi27 with split rule %s", rule.value)
    return TypedMatrix("phi27", [t.label for t in all_types()], rows, band=(-2, 0, 2))


def model_matrix(model: str, rule: SplitRule = SplitRule.SHARED, parallel: int = 1) -> TypedMatrix:
    if model == "phi6":
        return phi6_matrix()
    if model == "phi27":
        return build_phi27(rule, parallel)
    raise InputError(f"unknown model {model!r} (expected phi6 or phi27)")


# ----------------------------------------------------------------------
# Certificates
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Certificate:
    matrix: str
    y: Optional[Fraction]
    power: int
    max_row_sum: Fraction
    passed: bool
    max_row_sum_float: float

    def to_dict(self) -> Dict:
        return {
            "matrix": self.matrix,
            "y": None if self.y is None else f"{self.y.numerator}/{self.y.denominator}",
            "power": self.power,
            "max_row_sum": f"{self.max_row_sum.numerator}/{self.max_row_sum.denominator}",
            "max_row_sum_float": self.max_row_sum_float,
            "pass": self.passed,
        }


def _require_nonnegative(m: RationalMatrix) -> None:
    if not m.is_nonnegative():
        raise InputError("certificates need a nonnegative matrix")


def power_rowsum_certificate(
    m: RationalMatrix,
    e: int,
    *,
    matrix_id: str = "custom",
    y: Optional[Fraction] = None,
    bit_rail: Optional[int] = DEFAULT_BIT_RAIL,
) -> Certificate:
    """Compute m^e exactly; pass iff every row sum of m^e is strictly below 1."""
    if e < 1:
        raise InputError(f"power must be >= 1, got {e}")
    _require_nonnegative(m)
    p = m.power(e, bit_rail)
    sums = p.row_sum_numerators()
    top = max(sums)
    cert = Certificate(
        matrix=matrix_id,
        y=y,
        power=e,
        max_row_sum=Fraction(top, p.denominator),
        passed=top < p.denominator,
        max_row_sum_float=top / p.denominator,
    )
    logger.info("%s^%d: max row sum %.6f (%s)", matrix_id, e, cert.max_row_sum_float,
                "pass" if cert.passed else "fail")
    return cert


def certify_model(
    model: str,
    e: int,
    y: Fraction = DEFAULT_Y,
    *,
    rule: SplitRule = SplitRule.SHARED,
    bit_rail: Optional[int] = DEFAULT_BIT_RAIL,
    parallel: int = 1,
) -> Certificate:
    m = eval_matrix(model_matrix(model, rule, parallel), y)
    return power_rowsum_certificate(m, e, matrix_id=model, y=Fraction(y), bit_rail=bit_rail)


def minimal_passing_power(
    m: RationalMatrix,
    e_max: int,
    bit_rail: Optional[int] = DEFAULT_BIT_RAIL,
) -> Optional[int]:
    """Smallest e <= e_max whose power has all row sums below 1, or None."""
    _require_nonnegative(m)
    p = m
    for e in range(1, e_max + 1):
        if e > 1:
            p = p @ m
            if bit_rail is not None and p.bit_size() > bit_rail:
                return None
        if max(p.row_sum_numerators()) < p.denominator:
            return e
    return None


# ----------------------------------------------------------------------
# Structure and float cross-checks
# ----------------------------------------------------------------------

MatrixLike = Union[TypedMatrix, RationalMatrix, np.ndarray]


def _pattern(m: MatrixLike) -> np.ndarray:
    if isinstance(m, TypedMatrix):
        return m.pattern()
    if isinstance(m, RationalMatrix):
        return np.array([[v != 0 for v in row] for row in m.numerators], dtype=bool)
    return np.asarray(m) != 0


def irreducibility_check(m: MatrixLike) -> bool:
    """True iff the digraph of nonzero entries is strongly connected."""
    pattern = _pattern(m)
    n_components, _ = connected_components(csr_matrix(pattern.astype(np.int8)), directed=True, connection="strong")
    return n_components == 1


def spectral_radius_estimate(
    m: np.ndarray,
    tol: float = POWER_ITERATION_TOL,
    max_iter: int = POWER_ITERATION_CAP,
) -> float:
    """Perron root of a nonnegative matrix by power iteration on m + I.

    The shift removes the tie between +rho and -rho in periodic matrices.
    Iteration stops when the Collatz-Wielandt bounds min/max (Bx)_i / x_i agree
    to relative tolerance ``tol``.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"matrix must be square, got shape {a.shape}")
    if (a < 0).any():
        raise InputError("spectral radius estimate needs a nonnegative matrix")
    b = a + np.eye(a.shape[0])
    x = np.ones(a.shape[0])
    for _ in range(max_iter):
        y = b @ x
        ratios = y / x
        low, high = ratios.min(), ratios.max()
        if high - low <= tol * high:
            return float((low + high) / 2 - 1)
        x = y / np.linalg.norm(y)
        if not (x > 0).all():
            raise NumericError("iterate lost positivity; is the matrix irreducible?")
    raise NumericError(f"power iteration did not converge in {max_iter} iterations")


def scan_theta(m: TypedMatrix, thetas: Sequence[float]) -> List[Tuple[float, float]]:
    """Spectral radius of m at y = e^{-theta} for each theta."""
    return [(float(t), spectral_radius_estimate(m.evaluate_float(math.exp(-t)))) for t in thetas]

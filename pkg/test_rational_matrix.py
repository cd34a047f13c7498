"""
test_rational_matrix.py — Exact rational matrices and Laurent-polynomial matrices.

Run with: uv run pytest test_rational_matrix.py -v
"""

import sys
import os
import pickle
from fractions import Fraction

import numpy as np
import pytest
import sympy

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '.')))
from core.errors import DomainError, InputError, ResourceError
from core.laurent import Y, LaurentPoly, TypedMatrix, eval_matrix
from core.rational_matrix import RationalMatrix


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def random_rational_matrix(rng, n: int = 4, max_den: int = 7) -> RationalMatrix:
    rows = [
        [Fraction(int(rng.integers(0, 5)), int(rng.integers(1, max_den + 1))) for _ in range(n)]
        for _ in range(n)
    ]
    return RationalMatrix.from_fractions(rows)


def lp(*terms):
    """LaurentPoly from (coefficient, exponent) pairs."""
    out = LaurentPoly()
    for c, e in terms:
        out = out + LaurentPoly.monomial(Fraction(c), e)
    return out


# ---------------------------------------------------------------------------
# Tests
# ---------------------------------------------------------------------------

class TestRationalMatrix:
    def test_from_fractions_common_denominator(self):
        m = RationalMatrix.from_fractions([[Fraction(1, 2), Fraction(1, 3)], [0, Fraction(5, 6)]])
        assert m.denominator == 6
        assert m[0, 1] == Fraction(1, 3)
        assert m.to_fractions()[1] == [0, Fraction(5, 6)]

    def test_identity(self):
        rng = np.random.default_rng(0)
        m = random_rational_matrix(rng)
        i = RationalMatrix.identity(4)
        assert m @ i == m
        assert i @ m == m
        assert m.power(0) == i

    def test_binary_power_matches_naive(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            m = random_rational_matrix(rng)
            for e in (1, 2, 3, 7, 12):
                assert m.power(e) == m.naive_power(e)

    def test_pow_operator(self):
        m = RationalMatrix.from_fractions([[Fraction(1, 2), Fraction(1, 2)], [Fraction(1, 3), Fraction(2, 3)]])
        assert (m ** 5).max_row_sum() == 1
        assert [float(s) for s in (m ** 5).row_sums()] == pytest.approx([1.0, 1.0])

    def test_row_sums(self):
        m = RationalMatrix.from_fractions([[Fraction(1, 4), Fraction(1, 4)], [Fraction(3, 4), Fraction(1, 2)]])
        assert m.row_sums() == [Fraction(1, 2), Fraction(5, 4)]
        assert m.max_row_sum() == Fraction(5, 4)

    def test_reduced_keeps_value(self):
        m = RationalMatrix(np.array([[2, 4], [6, 8]], dtype=object), 10)
        r = m.reduced()
        assert r.denominator == 5
        assert r == m

    def test_bit_rail(self):
        m = RationalMatrix.from_fractions([[Fraction(1, 3), Fraction(1, 5)], [Fraction(1, 7), Fraction(1, 11)]])
        with pytest.raises(ResourceError) as info:
            m.power(64, bit_rail=100)
        diag = info.value.diagnostics
        assert diag["bit_rail"] == 100
        assert diag["bits"] > 100
        assert diag["power_target"] == 64
        assert 0 <= diag["power_accumulated"] < 64

    def test_no_rail(self):
        m = RationalMatrix.from_fractions([[Fraction(1, 3)]])
        assert m.power(200, bit_rail=None)[0, 0] == Fraction(1, 3 ** 200)

    def test_validation(self):
        with pytest.raises(InputError):
            RationalMatrix(np.zeros((2, 3), dtype=object))
        with pytest.raises(InputError):
            RationalMatrix(np.zeros((2, 2), dtype=object), 0)
        with pytest.raises(InputError):
            RationalMatrix.identity(2).power(-1)

    def test_nonnegative(self):
        assert RationalMatrix.identity(3).is_nonnegative()
        assert not RationalMatrix.from_fractions([[Fraction(-1, 2)]]).is_nonnegative()


class TestLaurentPoly:
    def test_zero_terms_dropped(self):
        p = lp((0, 3), (Fraction(1, 2), -1))
        assert p.exponents == frozenset({-1})
        assert not p.is_zero()
        assert LaurentPoly().is_zero()

    def test_addition_collects_terms(self):
        assert lp((1, 1)) + lp((2, 1)) == lp((3, 1))

    def test_evaluate(self):
        p = lp((Fraction(1, 36), -1), (Fraction(55, 36), 1))
        assert p.evaluate(Fraction(1, 3)) == Fraction(1, 12) + Fraction(55, 108)
        assert p.evaluate_float(1 / 3) == pytest.approx(float(p.evaluate(Fraction(1, 3))))
        with pytest.raises(DomainError):
            p.evaluate(0)

    def test_canonical_string(self):
        p = lp((Fraction(55, 36), 1), (Fraction(1, 36), -1))
        assert str(p) == "1/36*y^-1 + 55/36*y^1"

    def test_built_from_sympy_expression(self):
        p = LaurentPoly.from_expr(sympy.Rational(1, 36) / Y + sympy.Rational(55, 36) * Y)
        assert p == lp((Fraction(1, 36), -1), (Fraction(55, 36), 1))
        assert sympy.simplify(p.expr - (55 * Y**2 + 1) / (36 * Y)) == 0
        assert LaurentPoly.from_expr(0).is_zero()

    def test_rejects_non_rational_terms(self):
        with pytest.raises(InputError):
            LaurentPoly.from_expr(sympy.sqrt(2) * Y)
        with pytest.raises(InputError):
            LaurentPoly.from_expr(Y ** sympy.Rational(1, 2))

    def test_pickles_for_worker_processes(self):
        p = lp((Fraction(5, 18), -1), (3, 1))
        assert pickle.loads(pickle.dumps(p)) == p
        assert pickle.loads(pickle.dumps(LaurentPoly())).is_zero()


class TestTypedMatrix:
    def test_band_and_sign_validation(self):
        with pytest.raises(InputError):
            TypedMatrix("m", ["a"], [[lp((1, 2))]], band=(-1, 0, 1))
        with pytest.raises(InputError):
            TypedMatrix("m", ["a"], [[lp((-1, 0))]], band=(0,))
        with pytest.raises(InputError):
            TypedMatrix("m", ["a", "b"], [[lp((1, 0))]], band=(0,))

    def test_evaluate_and_dump(self):
        m = TypedMatrix(
            "m",
            ["a", "b"],
            [[LaurentPoly(), lp((Fraction(1, 2), 1))], [lp((1, -1)), LaurentPoly()]],
            band=(-1, 1),
        )
        r = eval_matrix(m, Fraction(1, 3))
        assert r[0, 1] == Fraction(1, 6)
        assert r[1, 0] == 3
        assert m.entry("b", "a") == lp((1, -1))
        assert m.dump() == "# m 2x2 band [-1, 1]\na\tb\t1/2*y^1\nb\ta\t1/1*y^-1\n"
        assert m.pattern().tolist() == [[False, True], [True, False]]
        with pytest.raises(DomainError):
            eval_matrix(m, Fraction(-1))

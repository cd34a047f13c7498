from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Sequence

import numpy as np
import sympy

from core.errors import DomainError, InputError
from core.rational_matrix import RationalMatrix

# laurent.py: Laurent polynomials in y = e^{-theta} and matrices of them.
#
# The exponent of y records the displacement of a child particle relative to its
# parent (deeper is positive), so a branching walk's mean matrix at theta is
# obtained by substituting y.

Y = sympy.Symbol("y", positive=True)


def to_fraction(r) -> Fraction:
    r = sympy.Rational(r)
    return Fraction(int(r.p), int(r.q))


def to_rational(c) -> sympy.Rational:
    c = Fraction(c)
    return sympy.Rational(c.numerator, c.denominator)


class LaurentPoly:
    """Sympy expression in ``Y`` with rational coefficients and integer exponents."""

    __slots__ = ("expr", "_terms")

    def __init__(self, terms: Optional[Mapping[int, Fraction]] = None):
        expr = sympy.Add(*(to_rational(c) * Y ** int(e) for e, c in (terms or {}).items()))
        self._set(expr)

    def _set(self, expr) -> None:
        self.expr = sympy.expand(expr)
        terms: Dict[int, Fraction] = {}
        for term in sympy.Add.make_args(self.expr):
            if term == 0:
                continue
            coeff, e = term.as_coeff_exponent(Y)
            if not (coeff.is_Rational and e.is_Integer):
                raise InputError(f"not a rational Laurent term in y: {term}")
            terms[int(e)] = terms.get(int(e), Fraction(0)) + to_fraction(coeff)
        self._terms = {e: c for e, c in sorted(terms.items()) if c}

    @classmethod
    def from_expr(cls, expr) -> "LaurentPoly":
        p = cls.__new__(cls)
        p._set(sympy.sympify(expr))
        return p

    @classmethod
    def monomial(cls, coeff, exponent: int) -> "LaurentPoly":
        return cls.from_expr(to_rational(coeff) * Y ** exponent)

    @property
    def terms(self) -> Dict[int, Fraction]:
        return dict(self._terms)

    @property
    def exponents(self) -> FrozenSet[int]:
        return frozenset(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_nonnegative(self) -> bool:
        return all(c >= 0 for c in self._terms.values())

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        return LaurentPoly.from_expr(self.expr + other.expr)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    def __getstate__(self):
        return {"terms": self._terms}

    def __setstate__(self, state):
        self.__init__(state["terms"])

    def evaluate(self, y: Fraction) -> Fraction:
        y = Fraction(y)
        if y <= 0:
            raise DomainError(f"y must be positive, got {y}")
        return to_fraction(self.expr.subs(Y, to_rational(y)))

    def evaluate_float(self, y: float) -> float:
        return float(self.expr.subs(Y, sympy.Float(y)))

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = [f"{c.numerator}/{c.denominator}*y^{e}" for e, c in self._terms.items()]
        return " + ".join(parts)

    __repr__ = __str__


class TypedMatrix:
    """Square matrix of Laurent polynomials with labelled rows and columns."""

    def __init__(
        self,
        name: str,
        labels: Sequence[str],
        entries: Sequence[Sequence[LaurentPoly]],
        band: Iterable[int],
    ):
        self.name = name
        self.labels = list(labels)
        self.entries = [list(row) for row in entries]
        self.band = frozenset(band)
        n = len(self.labels)
        if len(self.entries) != n or any(len(row) != n for row in self.entries):
            raise InputError(f"{name}: expected a {n}x{n} matrix")
        for i, row in enumerate(self.entries):
            for j, p in enumerate(row):
                if not p.is_nonnegative():
                    raise InputError(f"{name}[{self.labels[i]}, {self.labels[j]}] has a negative coefficient")
                if not p.exponents <= self.band:
                    raise InputError(f"{name}[{self.labels[i]}, {self.labels[j]}] leaves the band {sorted(self.band)}")
        self._index = {label: i for i, label in enumerate(self.labels)}

    @property
    def dim(self) -> int:
        return len(self.labels)

    def entry(self, row: str, col: str) -> LaurentPoly:
        return self.entries[self._index[row]][self._index[col]]

    def evaluate(self, y: Fraction) -> RationalMatrix:
        return RationalMatrix.from_fractions([[p.evaluate(y) for p in row] for row in self.entries])

    def evaluate_float(self, y: float) -> np.ndarray:
        return np.array([[p.evaluate_float(y) for p in row] for row in self.entries], dtype=float)

    def pattern(self) -> np.ndarray:
        """Boolean matrix of nonzero entries."""
        return np.array([[not p.is_zero() for p in row] for row in self.entries], dtype=bool)

    def dump(self) -> str:
        """Canonical text form, one nonzero entry per line: ``row<TAB>col<TAB>poly``."""
        lines = [f"# {self.name} {self.dim}x{self.dim} band {sorted(self.band)}"]
        for i, row in enumerate(self.entries):
            for j, p in enumerate(row):
                if not p.is_zero():
                    lines.append(f"{self.labels[i]}\t{self.labels[j]}\t{p}")
        return "\n".join(lines) + "\n"


def eval_matrix(m: TypedMatrix, y: Fraction) -> RationalMatrix:
    """Substitute a positive rational y into every entry."""
    y = Fraction(y)
    if y <= 0:
        raise DomainError(f"y must be positive, got {y}")
    return m.evaluate(y)

"""
test_rde.py — Exact and sampled laws of the truncated root-visit count V_k.

Run with: uv run pytest test_rde.py -v
"""

import sys
import os
import math
from fractions import Fraction

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '.')))
from core.errors import BoundError, InputError
from core.rde import (
    VPmf,
    goodness_of_fit,
    rde_mixture,
    rde_pmf_exact,
    rde_sample,
    rde_step,
    sample_many,
    support_bound,
)
from core.recurrence import iterate_A
from core.rng import RngStreamSpec


def mean_and_var(pmf: VPmf):
    p = [float(m) for m in pmf.pmf]
    mean = sum(v * m for v, m in enumerate(p))
    var = sum(v * v * m for v, m in enumerate(p)) - mean ** 2
    return mean, var


class TestExactLaw:
    def test_first_laws(self):
        assert rde_pmf_exact(0).pmf == [1]
        assert rde_pmf_exact(1).pmf == [Fraction(2, 3), Fraction(1, 3)]
        assert rde_pmf_exact(2).pmf == [Fraction(1, 2), Fraction(23, 54), Fraction(2, 27)]

    def test_q(self):
        assert rde_pmf_exact(0).q == 1
        assert rde_pmf_exact(1).q == Fraction(5, 6)

    def test_mass_and_support(self):
        for k in range(9):
            pmf = rde_pmf_exact(k)
            assert sum(pmf.pmf) == 1
            assert all(m >= 0 for m in pmf.pmf)
            assert pmf.support_max <= support_bound(k)

    def test_q_nonincreasing(self):
        qs = [rde_pmf_exact(k).q for k in range(9)]
        assert all(a >= b for a, b in zip(qs, qs[1:]))

    @pytest.mark.parametrize("k", range(11))
    def test_generating_function_matches_operator_iterate(self, k):
        pmf = rde_pmf_exact(k)
        for x in (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
            assert pmf.pgf(x) == iterate_A(k, x)

    def test_depth_bounds(self):
        with pytest.raises(BoundError):
            rde_pmf_exact(13)
        with pytest.raises(BoundError):
            rde_pmf_exact(-1)

    def test_to_dict(self):
        d = rde_pmf_exact(1).to_dict()
        assert d == {"k": 1, "pmf": {"0": "2/3", "1": "1/3"}, "q": "5/6"}


class TestMixture:
    def test_point_mass_has_no_y(self):
        mix = rde_mixture(rde_pmf_exact(0))
        assert mix.Y is None
        assert mix.weights == (Fraction(1, 3), Fraction(0), Fraction(2, 3))

    @pytest.mark.parametrize("k", range(1, 6))
    def test_components(self, k):
        mix = rde_mixture(rde_pmf_exact(k))
        assert sum(mix.weights) == 1
        assert all(w >= 0 for w in mix.weights)
        assert sum(mix.X) == 1
        assert sum(mix.Z) == 1
        assert sum(mix.Y) == 1
        assert all(m >= 0 for m in mix.Y)

    @pytest.mark.parametrize("k", range(6))
    def test_combine_matches_step(self, k):
        pmf = rde_pmf_exact(k)
        assert rde_mixture(pmf).combine() == rde_step(pmf).pmf


class TestSampling:
    def test_depth_zero(self):
        rng = RngStreamSpec(1).generator()
        assert np.all(sample_many(0, 10, rng) == 0)
        assert rde_sample(0, rng) == 0

    def test_samples_within_support(self):
        rng = RngStreamSpec(2).generator()
        s = sample_many(7, 5000, rng)
        assert s.min() >= 0
        assert s.max() <= support_bound(7)

    def test_mean_matches_exact_law(self):
        k, n = 6, 20_000
        pmf = rde_pmf_exact(k)
        mean, var = mean_and_var(pmf)
        s = sample_many(k, n, RngStreamSpec(3).generator())
        assert abs(s.mean() - mean) < 4 * math.sqrt(var / n)

    def test_chi_square(self):
        k = 6
        pmf = rde_pmf_exact(k)
        s = sample_many(k, 20_000, RngStreamSpec(4).generator())
        stat, p = goodness_of_fit(s, pmf)
        assert stat >= 0
        assert p > 1e-3

    def test_depth_one_frequencies(self):
        n = 30_000
        s = sample_many(1, n, RngStreamSpec(5).generator())
        assert abs((s == 1).mean() - 1 / 3) < 4 * math.sqrt(2 / 9 / n)

    def test_goodness_of_fit_rejects_bad_samples(self):
        pmf = rde_pmf_exact(2)
        with pytest.raises(InputError):
            goodness_of_fit(np.array([0, 1, 5]), pmf)
        with pytest.raises(InputError):
            goodness_of_fit(np.array([], dtype=int), pmf)

    def test_negative_depth(self):
        with pytest.raises(InputError):
            sample_many(-1, 3, RngStreamSpec(0).generator())

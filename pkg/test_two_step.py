"""
test_two_step.py — Exhaustive two-round enumeration behind the 27-type matrix.

Run with: uv run pytest test_two_step.py -v
"""

import sys
import os
import math
from fractions import Fraction

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '.')))
from core.errors import InputError
from core.frog_model import Custom, FrogModel
from core.rng import RngStreamSpec
from core.two_step import (
    LOCAL_TREE,
    TERMINAL_LEVELS,
    ParticleType,
    SplitRule,
    _initial_frogless,
    all_types,
    decompose,
    enumerate_two_step,
    expected_frogs,
    outcome_children,
    terminal_states,
)
from core.walkers import WalkerKind


def simulate_frog_counts(t: ParticleType, reps: int, seed: int) -> np.ndarray:
    """Frogs alive after two rounds of the local model started from a one-frog particle."""
    init = Custom(no_ancestor_frogs=True, emptied=_initial_frogless(t))
    counts = np.empty(reps)
    for i in range(reps):
        model = FrogModel(LOCAL_TREE, init, WalkerKind.SIMPLE, [], RngStreamSpec(seed, i).generator())
        model.step()
        model.step()
        counts[i] = len(model.state.frogs)
    return counts


class TestParticleType:
    def test_index_round_trip(self):
        types = all_types()
        assert len(types) == 27
        assert [t.index for t in types] == list(range(27))
        assert ParticleType.from_index(14) == ParticleType(2, 1, 2)
        assert ParticleType(3, 0, 1).label == "P(3,0,1)"

    def test_invalid(self):
        with pytest.raises(InputError):
            ParticleType(0, 0, 0)
        with pytest.raises(InputError):
            ParticleType(1, 3, 0)
        with pytest.raises(InputError):
            ParticleType.from_index(27)


class TestDecompose:
    def test_shared(self):
        assert decompose(7, 4, 1) == [ParticleType(3, 2, 1), ParticleType(3, 2, 1), ParticleType(1, 2, 1)]

    def test_first_only(self):
        assert decompose(7, 4, 1, SplitRule.FIRST_ONLY) == [
            ParticleType(3, 2, 1), ParticleType(3, 0, 0), ParticleType(1, 0, 0),
        ]

    def test_preserves_frogs(self):
        for n in range(1, 12):
            assert sum(p.a for p in decompose(n, 0, 0)) == n


class TestEnumeration:
    @pytest.mark.parametrize("t", [ParticleType(1, 0, 0), ParticleType(1, 2, 2), ParticleType(2, 1, 0)])
    def test_probabilities_sum_to_one(self, t):
        outcomes = enumerate_two_step(t)
        assert sum(o.probability for o in outcomes) == 1
        assert all(o.probability > 0 for o in outcomes)

    def test_two_steps_up(self):
        # the only way to end two levels up is parent then parent again
        outcomes = enumerate_two_step(ParticleType(1, 0, 0))
        up = sum(o.probability for o in outcomes if any(d == -2 for _, d in o.children))
        assert up == Fraction(1, 36)

    def test_expected_frogs_single_frog(self):
        # 1 + (1/6)(4/6) + (5/6)(1 + 55/36)
        assert expected_frogs(enumerate_two_step(ParticleType(1, 0, 0))) == Fraction(695, 216)

    def test_emptied_vertices_reduce_growth(self):
        full = expected_frogs(enumerate_two_step(ParticleType(1, 0, 0)))
        empty = expected_frogs(enumerate_two_step(ParticleType(1, 2, 2)))
        assert empty < full

    @pytest.mark.parametrize("t", all_types(), ids=lambda t: t.label)
    def test_terminal_states(self, t):
        for state in terminal_states(t):
            assert all(v.level in TERMINAL_LEVELS for v, _ in state.piles)
            children = outcome_children(state)
            assert sum(p.a for p, _ in children) == state.frogs
            for p, d in children:
                assert p.a <= 3 and p.b <= 2 and p.c <= 2
                assert d in TERMINAL_LEVELS

    def test_split_rules_agree_on_frog_counts(self):
        t = ParticleType(2, 2, 0)
        shared = expected_frogs(enumerate_two_step(t, SplitRule.SHARED))
        first = expected_frogs(enumerate_two_step(t, SplitRule.FIRST_ONLY))
        assert shared == first

    def test_matches_simulation(self):
        t = ParticleType(1, 1, 1)
        n = 20_000
        counts = simulate_frog_counts(t, n, seed=31)
        exact = float(expected_frogs(enumerate_two_step(t)))
        assert abs(counts.mean() - exact) < 4 * counts.std(ddof=1) / math.sqrt(n)

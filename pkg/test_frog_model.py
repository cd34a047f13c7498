"""
test_frog_model.py — Unit tests for the synchronous frog model engine.

Run with: uv run pytest test_frog_model.py -v
"""

import sys
import os
import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '.')))
from core.errors import InputError
from core.frog_model import (
    Custom,
    DepthCap,
    FenceAtDepth,
    FrogModel,
    FrogStatus,
    NonePerSite,
    OnePerSite,
    StopAtRoot,
    run_frog_model,
)
from core.graphs import ROOT, DAryTree, HomogeneousTree, VertexAddress
from core.rng import RngStreamSpec
from core.walkers import WalkerKind


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

class ScriptedRng:
    """Stand-in generator that replays fixed neighbor choices, one list per round."""

    def __init__(self, rounds):
        self.rounds = list(rounds)

    def integers(self, low, high):
        choices = self.rounds.pop(0)
        assert len(choices) == len(high)
        assert all(0 <= c < h for c, h in zip(choices, high))
        return np.array(choices)


def make_model(graph=None, init=OnePerSite(), walkers=WalkerKind.SIMPLE, rules=(), seed=3, **options):
    graph = graph if graph is not None else DAryTree(2)
    return FrogModel(graph, init, walkers, rules, RngStreamSpec(seed).generator(), **options)


# ---------------------------------------------------------------------------
# Tests
# ---------------------------------------------------------------------------

class TestRun:
    def test_horizon_zero(self):
        summary = make_model().run(0)
        assert summary.rounds == 0
        assert summary.root_visits == 0
        assert summary.woken == 0
        assert summary.truncated

    def test_negative_horizon(self):
        with pytest.raises(InputError):
            make_model().run(-1)

    def test_frog_conservation(self):
        model = make_model(DAryTree(3), max_frogs=None)
        summary = model.run(15)
        st = model.state
        assert sum(summary.status_counts.values()) == len(st.frogs)
        assert summary.woken == len(st.frogs) - 1
        # one sleeping frog per site: every newly visited vertex woke exactly one
        assert summary.woken == len(st.visited) - 1

    def test_none_per_site_keeps_single_frog(self):
        summary = make_model(init=NonePerSite()).run(25)
        assert summary.woken == 0
        assert summary.rounds == 25

    def test_deterministic_given_seed(self):
        a = make_model(rules=[DepthCap(8)], seed=99)
        b = make_model(rules=[DepthCap(8)], seed=99)
        assert a.run(40) == b.run(40)
        assert a.state.visited == b.state.visited

    def test_run_frog_model(self):
        rng = RngStreamSpec(5).generator()
        summary = run_frog_model(DAryTree(2), OnePerSite(), WalkerKind.SIMPLE, [], 10, rng)
        assert summary.rounds == 10
        assert summary.to_dict()["status_counts"]["awake"] == summary.woken + 1


class TestWalkers:
    def test_non_backtracking_never_returns(self):
        model = make_model(DAryTree(2), init=NonePerSite(), walkers=WalkerKind.NON_BACKTRACKING)
        model.run(20)
        frog = model.state.frogs[0]
        assert frog.steps == 20
        assert frog.address.level == 20
        assert model.state.root_visits == 0


class TestStopRules:
    def test_fence_at_depth_one(self):
        model = make_model(DAryTree(2), rules=[FenceAtDepth(1)])
        while model.step():
            pass
        assert model.status_counts()[FrogStatus.STUNNED.value] == 2
        assert model.state.round == 1

    def test_woken_frog_may_leave_fence(self):
        model = make_model(DAryTree(2), rules=[FenceAtDepth(1)], stun_woken_on_fence=False)
        model.step()
        counts = model.status_counts()
        assert counts[FrogStatus.STUNNED.value] == 1
        assert counts[FrogStatus.AWAKE.value] == 1

    def test_stop_before_wake_still_stuns_woken_frogs(self):
        model = make_model(DAryTree(2), rules=[FenceAtDepth(1)], wake_before_stop=False)
        model.step()
        assert [f.status for f in model.state.frogs] == [FrogStatus.STUNNED, FrogStatus.STUNNED]
        assert not model.awake

    def test_stop_before_wake_with_mobile_woken_frogs(self):
        model = make_model(DAryTree(2), rules=[FenceAtDepth(1)], wake_before_stop=False, stun_woken_on_fence=False)
        model.step()
        assert [f.status for f in model.state.frogs] == [FrogStatus.STUNNED, FrogStatus.AWAKE]

    def test_stop_before_wake_caps_woken_frogs(self):
        model = make_model(DAryTree(2), rules=[DepthCap(1)], wake_before_stop=False)
        model.step()
        assert [f.status for f in model.state.frogs] == [FrogStatus.CAPPED, FrogStatus.CAPPED]

    def test_resume_stunned_moves_fence(self):
        model = make_model(DAryTree(2), rules=[FenceAtDepth(1)])
        model.step()
        assert model.resume_stunned(new_fence=2) == 2
        assert model.fence == 2
        assert len(model.awake) == 2
        assert model.epoch_root_visits == 0

    def test_stop_at_root(self):
        model = make_model(DAryTree(2), rules=[StopAtRoot(), DepthCap(8)], seed=8)
        model.run(200)
        for frog in model.state.frogs:
            if frog.status is FrogStatus.STOPPED_AT_ROOT:
                assert frog.id != 0
                assert frog.address == ROOT

    def test_depth_cap_truncates(self):
        model = make_model(DAryTree(2), rules=[DepthCap(3)])
        summary = model.run(10_000)
        assert model.capped
        assert summary.truncated
        assert all(f.address.level <= 3 for f in model.state.frogs)

    def test_population_rail(self):
        model = make_model(DAryTree(3), max_frogs=10)
        summary = model.run(10_000)
        assert model.halted
        assert summary.truncated

    def test_bad_rules(self):
        with pytest.raises(InputError):
            make_model(rules=[FenceAtDepth(0)])
        with pytest.raises(InputError):
            make_model(rules=[DepthCap(0)])


class TestScriptedRounds:
    def test_first_visitor_recorded(self):
        # round 1: frog 0 -> (1, 1); round 2: frog 0 -> (2, 2), frog 1 -> root
        model = FrogModel(DAryTree(2), OnePerSite(), WalkerKind.SIMPLE, [], ScriptedRng([[1], [1, 0]]))
        model.step()
        model.step()
        st = model.state
        assert st.visited[VertexAddress(1, 1)] == 0
        assert st.visited[VertexAddress(2, 2)] == 0
        assert st.root_visits == 1
        assert len(st.frogs) == 3
        assert st.frogs[2].woken_round == 2

    def test_ancestor_frogs_absent(self):
        model = FrogModel(HomogeneousTree(5), Custom(no_ancestor_frogs=True), WalkerKind.SIMPLE, [], ScriptedRng([[0]]))
        model.step()
        assert model.state.frogs[0].address == VertexAddress(-1, 0)
        assert len(model.state.frogs) == 1
        assert VertexAddress(-1, 0) in model.state.visited

    def test_custom_level_table(self):
        init = Custom(no_ancestor_frogs=False, level_counts=((1, 0),))
        model = FrogModel(DAryTree(2), init, WalkerKind.SIMPLE, [], ScriptedRng([[0]]))
        model.step()
        assert len(model.state.frogs) == 1


class TestCustom:
    def test_counts_must_be_zero_or_one(self):
        with pytest.raises(InputError):
            Custom(default=2)
        with pytest.raises(InputError):
            Custom(level_counts=((3, 5),))

    def test_emptied_vertices(self):
        init = Custom(emptied=frozenset({VertexAddress(1, 0)}))
        g = DAryTree(2)
        assert init.sleeping_count(g, VertexAddress(1, 0)) == 0
        assert init.sleeping_count(g, VertexAddress(1, 1)) == 1


@pytest.mark.slow
def test_binary_tree_root_visited_in_almost_every_run():
    runs = 100
    hits = 0
    for i in range(runs):
        rng = RngStreamSpec(2024, i).generator()
        summary = run_frog_model(DAryTree(2), OnePerSite(), WalkerKind.SIMPLE, [DepthCap(12)], 1000, rng)
        hits += summary.root_visits > 0
    assert hits / runs >= 0.99

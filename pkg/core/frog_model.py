import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import InputError
from core.graphs import ROOT, GraphKind, VertexAddress
from core.walkers import WalkerKind, walker_options

# frog_model.py: synchronous-round frog model engine.
#
# Round t: every awake frog moves at once (in frog-id order for the random
# draws); every vertex visited for the first time wakes its sleeping frog, which
# takes its first step in round t + 1; stopping rules are applied after waking.
# Sleeping frogs are never materialized: a frog record is created the moment its
# vertex is first visited.
#
#   model = FrogModel(DAryTree(2), OnePerSite(), WalkerKind.SIMPLE, rng=rng)
#   summary = model.run(horizon=1000)

logger = logging.getLogger(__name__)


class FrogStatus(Enum):
    ASLEEP = "asleep"
    AWAKE = "awake"
    STOPPED_AT_ROOT = "stopped_at_root"
    STUNNED = "stunned"
    STOPPED_COLLISION = "stopped_collision"
    CAPPED = "capped"


@dataclass(slots=True)
class Frog:
    id: int
    address: VertexAddress
    status: FrogStatus = FrogStatus.AWAKE
    previous: Optional[VertexAddress] = None
    home: VertexAddress = ROOT
    woken_round: int = 0
    steps: int = 0


# ----------------------------------------------------------------------
# Initial conditions
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class OnePerSite:
    def sleeping_count(self, g: GraphKind, v: VertexAddress) -> int:
        return 1


@dataclass(frozen=True)
class NonePerSite:
    def sleeping_count(self, g: GraphKind, v: VertexAddress) -> int:
        return 0


@dataclass(frozen=True)
class Custom:
    """Per-vertex rules, checked in order: ancestors of the root, emptied set, level table."""

    no_ancestor_frogs: bool = True
    emptied: FrozenSet[VertexAddress] = frozenset()
    level_counts: Tuple[Tuple[int, int], ...] = ()
    default: int = 1

    def __post_init__(self):
        counts = [self.default] + [c for _, c in self.level_counts]
        if any(c not in (0, 1) for c in counts):
            raise InputError("custom initial conditions assign 0 or 1 sleeping frogs per vertex")

    def sleeping_count(self, g: GraphKind, v: VertexAddress) -> int:
        if self.no_ancestor_frogs and g.is_ancestor_of_root(v):
            return 0
        if v in self.emptied:
            return 0
        for level, count in self.level_counts:
            if v.level == level:
                return count
        return self.default


InitialCondition = Union[OnePerSite, NonePerSite, Custom]


# ----------------------------------------------------------------------
# Stopping rules
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class StopAtRoot:
    """Non-initial frogs freeze on reaching the root."""


@dataclass(frozen=True)
class SelfSimilarCollision:
    """Stop a woken frog whose first step goes away from the root onto a visited vertex."""


@dataclass(frozen=True)
class FenceAtDepth:
    k: int


@dataclass(frozen=True)
class DepthCap:
    k_max: int


StopRule = Union[StopAtRoot, SelfSimilarCollision, FenceAtDepth, DepthCap]


# ----------------------------------------------------------------------
# State and summary
# ----------------------------------------------------------------------

@dataclass
class FrogSystemState:
    graph: GraphKind
    frogs: List[Frog]
    # vertex -> id of the first frog to stand on it
    visited: Dict[VertexAddress, int]
    round: int = 0
    root_visits: int = 0


@dataclass(frozen=True)
class TraceSummary:
    root_visits: int
    status_counts: Dict[str, int]
    rounds: int
    woken: int
    truncated: bool

    def to_dict(self) -> Dict:
        return {
            "root_visits": self.root_visits,
            "status_counts": dict(self.status_counts),
            "rounds": self.rounds,
            "woken": self.woken,
            "truncated": self.truncated,
        }


class FrogModel:
    """Single-context frog model simulation with pluggable walkers and stopping rules."""

    def __init__(
        self,
        graph: GraphKind,
        init: InitialCondition = OnePerSite(),
        walkers: WalkerKind = WalkerKind.SIMPLE,
        stop_rules: Iterable[StopRule] = (),
        rng: Optional[np.random.Generator] = None,
        *,
        wake_before_stop: bool = True,
        stun_woken_on_fence: bool = True,
        max_frogs: Optional[int] = None,
    ):
        self.graph = graph
        self.init = init
        self.walkers = walkers
        self.rng = rng if rng is not None else np.random.default_rng()
        self.wake_before_stop = wake_before_stop
        self.stun_woken_on_fence = stun_woken_on_fence
        self.max_frogs = max_frogs

        rules = list(stop_rules)
        self.stop_at_root = any(isinstance(r, StopAtRoot) for r in rules)
        self.collision = any(isinstance(r, SelfSimilarCollision) for r in rules)
        fences = [r.k for r in rules if isinstance(r, FenceAtDepth)]
        caps = [r.k_max for r in rules if isinstance(r, DepthCap)]
        self.fence: Optional[int] = min(fences) if fences else None
        self.depth_cap: Optional[int] = min(caps) if caps else None
        if self.fence is not None and self.fence < 1:
            raise InputError(f"fence depth must be >= 1, got {self.fence}")
        if self.depth_cap is not None and self.depth_cap < 1:
            raise InputError(f"depth cap must be >= 1, got {self.depth_cap}")

        initial = Frog(0, ROOT)
        self.state = FrogSystemState(graph=graph, frogs=[initial], visited={ROOT: 0})
        self._awake: List[Frog] = [initial]
        self.epoch_root_visits = 0
        self.halted = False
        self.capped = False

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------

    @property
    def awake(self) -> Sequence[Frog]:
        return tuple(self._awake)

    def step(self) -> bool:
        """Advance one synchronous round; returns False if no frog was awake."""
        movers = self._awake
        if not movers:
            return False
        st = self.state
        g = self.graph

        option_lists = [walker_options(g, self.walkers, f) for f in movers]
        choices = self.rng.integers(0, [len(o) for o in option_lists])

        st.round += 1
        first_visits: Dict[VertexAddress, List[Frog]] = {}
        for frog, options, c in zip(movers, option_lists, choices):
            target = options[int(c)]
            frog.previous = frog.address
            frog.address = target
            frog.steps += 1
            if target == ROOT:
                st.root_visits += 1
                self.epoch_root_visits += 1
            elif target not in st.visited:
                first_visits.setdefault(target, []).append(frog)

        if self.wake_before_stop:
            woken = self._wake(first_visits)
            self._apply_stops(movers, woken, first_visits)
        else:
            # stops settle on the movers first; the frogs they wake then face
            # the fence and depth cap where they stand
            self._apply_stops(movers, [], first_visits)
            woken = self._wake(first_visits)
            self._apply_stops([], woken, {})

        self._awake = [f for f in movers if f.status is FrogStatus.AWAKE]
        self._awake.extend(f for f in woken if f.status is FrogStatus.AWAKE)
        return True

    def run(self, horizon: int) -> TraceSummary:
        if horizon < 0:
            raise InputError(f"horizon must be >= 0, got {horizon}")
        while self.state.round < horizon and self._awake and not self.halted:
            self.step()
        return self.summary()

    def resume_stunned(self, new_fence: Optional[int] = None) -> int:
        """Wake every stunned frog and move the fence; returns how many resumed."""
        resumed = 0
        for frog in self.state.frogs:
            if frog.status is FrogStatus.STUNNED:
                frog.status = FrogStatus.AWAKE
                resumed += 1
        self.fence = new_fence
        self._awake = [f for f in self.state.frogs if f.status is FrogStatus.AWAKE]
        self.epoch_root_visits = 0
        return resumed

    def status_counts(self) -> Counter:
        return Counter(f.status.value for f in self.state.frogs)

    def summary(self) -> TraceSummary:
        st = self.state
        return TraceSummary(
            root_visits=st.root_visits,
            status_counts=dict(self.status_counts()),
            rounds=st.round,
            woken=len(st.frogs) - 1,
            truncated=bool(self._awake) or self.halted or self.capped,
        )

    # ------------------------------------------------------------------
    # Internal helpers
    # ------------------------------------------------------------------

    def _wake(self, first_visits: Dict[VertexAddress, List[Frog]]) -> List[Frog]:
        st = self.state
        woken = []
        for v, arrivals in first_visits.items():
            st.visited[v] = arrivals[0].id
            if self.init.sleeping_count(self.graph, v) > 0:
                frog = Frog(len(st.frogs), v, home=v, woken_round=st.round)
                st.frogs.append(frog)
                woken.append(frog)
        if self.max_frogs is not None and len(st.frogs) > self.max_frogs and not self.halted:
            logger.debug("population rail %d exceeded at round %d", self.max_frogs, st.round)
            self.halted = True
        return woken

    def _apply_stops(self, movers: List[Frog], woken: List[Frog], first_visits) -> None:
        g = self.graph

        if self.collision:
            for arrivals in first_visits.values():
                for frog in arrivals[1:]:
                    _stop(frog, FrogStatus.STOPPED_COLLISION)
            for frog in movers:
                if (frog.id != 0 and frog.steps == 1 and frog.address not in first_visits
                        and frog.address != ROOT
                        and g.depth(frog.address) > g.depth(frog.previous)):
                    _stop(frog, FrogStatus.STOPPED_COLLISION)

        if self.stop_at_root:
            for frog in movers:
                if frog.id != 0 and frog.address == ROOT:
                    _stop(frog, FrogStatus.STOPPED_AT_ROOT)

        if self.fence is not None:
            for frog in movers:
                if g.depth(frog.address) >= self.fence:
                    _stop(frog, FrogStatus.STUNNED)
            if self.stun_woken_on_fence:
                for frog in woken:
                    if g.depth(frog.address) >= self.fence:
                        _stop(frog, FrogStatus.STUNNED)

        if self.depth_cap is not None:
            for frog in list(movers) + list(woken):
                if g.depth(frog.address) >= self.depth_cap and frog.status is FrogStatus.AWAKE:
                    frog.status = FrogStatus.CAPPED
                    self.capped = True


def _stop(frog: Frog, status: FrogStatus) -> None:
    if frog.status is FrogStatus.AWAKE:
        frog.status = status


def run_frog_model(
    g: GraphKind,
    init: InitialCondition,
    walkers: WalkerKind,
    stop_rules: Iterable[StopRule],
    horizon: int,
    rng: np.random.Generator,
    **options,
) -> TraceSummary:
    """Run one simulation for at most ``horizon`` rounds and summarize it."""
    model = FrogModel(g, init, walkers, stop_rules, rng, **options)
    return model.run(horizon)

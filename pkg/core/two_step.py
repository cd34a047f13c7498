"""Two-round exhaustive enumeration of the local frog model on the degree-6 homogeneous tree.

A particle P(a, b, c) is a awake frogs on one vertex that has at least b
frogless children and at least c frogless siblings.  Starting from one
particle at the origin, every joint move of two synchronous rounds is
enumerated with its exact probability; the frogs left at the end are grouped
by vertex and cut back into particles, which become the children of the
starting particle in a 27-type branching random walk.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations_with_replacement, product
from typing import Dict, FrozenSet, Iterator, List, Tuple

from core.errors import ContractViolation, InputError
from core.graphs import ROOT, HomogeneousTree, VertexAddress

logger = logging.getLogger(__name__)

LOCAL_TREE = HomogeneousTree(5)
MAX_A = 3
MAX_EMPTY = 2
TERMINAL_LEVELS = (-2, 0, 2)


@dataclass(frozen=True, order=True)
class ParticleType:
    a: int
    b: int
    c: int

    def __post_init__(self):
        if not (1 <= self.a <= MAX_A and 0 <= self.b <= MAX_EMPTY and 0 <= self.c <= MAX_EMPTY):
            raise InputError(f"invalid particle type ({self.a}, {self.b}, {self.c})")

    @property
    def index(self) -> int:
        return (self.a - 1) * 9 + self.b * 3 + self.c

    @classmethod
    def from_index(cls, i: int) -> "ParticleType":
        if not 0 <= i < 27:
            raise InputError(f"particle index must lie in [0, 27), got {i}")
        return cls(i // 9 + 1, (i // 3) % 3, i % 3)

    @property
    def label(self) -> str:
        return f"P({self.a},{self.b},{self.c})"


def all_types() -> List[ParticleType]:
    return [ParticleType.from_index(i) for i in range(27)]


class SplitRule(Enum):
    # every particle cut from a pile keeps the vertex's (b, c)
    SHARED = "shared"
    # only the first particle keeps (b, c); the rest get (0, 0)
    FIRST_ONLY = "first_only"


Child = Tuple[ParticleType, int]


@dataclass(frozen=True)
class ChildOutcome:
    probability: Fraction
    # sorted multiset of (type, displacement)
    children: Tuple[Child, ...]

    @property
    def frogs(self) -> int:
        return sum(t.a for t, _ in self.children)


@dataclass(frozen=True)
class TerminalState:
    """One outcome before decomposition: frog piles with their true emptiness counts."""

    probability: Fraction
    piles: Tuple[Tuple[VertexAddress, int], ...]
    emptiness: Tuple[Tuple[VertexAddress, int, int], ...]

    @property
    def frogs(self) -> int:
        return sum(n for _, n in self.piles)


# ----------------------------------------------------------------------
# Local model
# ----------------------------------------------------------------------

def _initial_frogless(t: ParticleType) -> FrozenSet[VertexAddress]:
    g = LOCAL_TREE
    children = g.neighbors(ROOT)[1:]
    siblings = g.siblings(ROOT)
    return frozenset(children[: t.b]) | frozenset(siblings[: t.c])


def _is_frogless(v: VertexAddress, emptied: FrozenSet[VertexAddress], visited) -> bool:
    # the origin and its ancestors carry no sleeping frog
    if v.level <= 0 and v.index == 0:
        return True
    return v in emptied or v in visited


def _multinomial(n: int, parts) -> int:
    out = math.factorial(n)
    for k in parts:
        out //= math.factorial(k)
    return out


def _joint_moves(state: Dict[VertexAddress, int]) -> Iterator[Tuple[Fraction, Counter]]:
    """Every joint destination of the frogs in ``state`` with its exact probability."""
    g = LOCAL_TREE
    per_vertex = []
    for v, n in sorted(state.items()):
        nbrs = g.neighbors(v)
        options = []
        for combo in combinations_with_replacement(range(len(nbrs)), n):
            counts = Counter(combo)
            prob = Fraction(_multinomial(n, counts.values()), len(nbrs) ** n)
            options.append((prob, [(nbrs[i], k) for i, k in counts.items()]))
        per_vertex.append(options)
    for choice in product(*per_vertex):
        prob = Fraction(1)
        dest: Counter = Counter()
        for p, moves in choice:
            prob *= p
            for w, k in moves:
                dest[w] += k
        yield prob, dest


def _round(
    states: Dict[Tuple, Fraction],
    emptied: FrozenSet[VertexAddress],
) -> Dict[Tuple, Fraction]:
    """Advance every (piles, visited) state by one round, waking frogs at new vertices."""
    nxt: Dict[Tuple, Fraction] = {}
    for (piles, visited), p in states.items():
        for q, dest in _joint_moves(dict(piles)):
            new_visited = set(visited)
            for w in list(dest):
                if w not in visited:
                    new_visited.add(w)
                    if not _is_frogless(w, emptied, ()):
                        dest[w] += 1
            key = (tuple(sorted(dest.items())), frozenset(new_visited))
            nxt[key] = nxt.get(key, Fraction(0)) + p * q
    return nxt


def terminal_states(t: ParticleType) -> Iterator[TerminalState]:
    """States after two rounds, with exact probabilities and untruncated (b, c) per pile."""
    g = LOCAL_TREE
    emptied = _initial_frogless(t)
    states = {(((ROOT, t.a),), frozenset([ROOT])): Fraction(1)}
    # round-1 wakers move in round 2; round-2 wakers stay put
    states = _round(states, emptied)
    states = _round(states, emptied)
    logger.debug("%s: %d terminal states", t.label, len(states))

    for (piles, visited), p in states.items():
        emptiness = []
        for v, _ in piles:
            if v.level not in TERMINAL_LEVELS:
                raise ContractViolation(f"{t.label}: frog ended at level {v.level}")
            children = g.neighbors(v)[1:]
            b = sum(_is_frogless(w, emptied, visited) for w in children)
            c = sum(_is_frogless(w, emptied, visited) for w in g.siblings(v))
            emptiness.append((v, b, c))
        yield TerminalState(probability=p, piles=piles, emptiness=tuple(emptiness))


def decompose(n: int, b: int, c: int, rule: SplitRule = SplitRule.SHARED) -> List[ParticleType]:
    """Cut a pile of n frogs into as many 3-frog particles as possible, then the remainder."""
    b, c = min(b, MAX_EMPTY), min(c, MAX_EMPTY)
    out = []
    while n > 0:
        a = min(MAX_A, n)
        if rule is SplitRule.FIRST_ONLY and out:
            out.append(ParticleType(a, 0, 0))
        else:
            out.append(ParticleType(a, b, c))
        n -= a
    return out


def outcome_children(state: TerminalState, rule: SplitRule = SplitRule.SHARED) -> Tuple[Child, ...]:
    piles = dict(state.piles)
    children: List[Child] = []
    for v, b, c in state.emptiness:
        children.extend((pt, v.level) for pt in decompose(piles[v], b, c, rule))
    return tuple(sorted(children))


def enumerate_two_step(t: ParticleType, rule: SplitRule = SplitRule.SHARED) -> List[ChildOutcome]:
    """Child outcomes of one particle, merged by child multiset; probabilities sum to 1."""
    merged: Dict[Tuple[Child, ...], Fraction] = {}
    for state in terminal_states(t):
        key = outcome_children(state, rule)
        merged[key] = merged.get(key, Fraction(0)) + state.probability
    outcomes = [ChildOutcome(p, kids) for kids, p in sorted(merged.items())]
    total = sum((o.probability for o in outcomes), Fraction(0))
    if total != 1:
        raise ContractViolation(f"{t.label}: outcome probabilities sum to {total}")
    return outcomes


def expected_frogs(outcomes: List[ChildOutcome]) -> Fraction:
    return sum((o.probability * o.frogs for o in outcomes), Fraction(0))

from enum import Enum
from typing import List, Optional, Protocol, Tuple

import numpy as np

from core.graphs import GraphKind, VertexAddress


class WalkerKind(Enum):
    SIMPLE = "simple"
    NON_BACKTRACKING = "non_backtracking"
    # non-backtracking plus the first-step collision stop applied by the engine
    SELF_SIMILAR = "self_similar"


class WalkerState(Protocol):
    address: VertexAddress
    previous: Optional[VertexAddress]


def walker_options(g: GraphKind, kind: WalkerKind, frog: WalkerState) -> List[VertexAddress]:
    """Neighbors the walker may move to from its current address.

    Non-backtracking walkers drop the vertex they arrived from, except on their
    first step (no memory yet) or at a vertex with a single neighbor.
    """
    options = g.neighbors(frog.address)
    if kind is WalkerKind.SIMPLE or frog.previous is None or len(options) == 1:
        return options
    return [w for w in options if w != frog.previous]


def step_walker(
    g: GraphKind,
    kind: WalkerKind,
    frog: WalkerState,
    rng: np.random.Generator,
) -> Tuple[VertexAddress, VertexAddress]:
    """Take one step; returns the new address and the walker memory (the vertex departed)."""
    options = walker_options(g, kind, frog)
    target = options[int(rng.integers(len(options)))]
    return target, frog.address

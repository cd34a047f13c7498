from dataclasses import dataclass
from enum import IntEnum
from typing import List, NamedTuple, Union

from core.errors import AddressError, InputError, NavigationError

# graphs.py: tree-like graph families with arithmetic vertex addressing.
#
# No vertex table is ever materialized.  A tree vertex is named by its level and
# its horizontal index within the level; child i of (k, j) is (k + 1, j * c_k + i)
# where c_k is the number of children at level k, and the parent is found by
# floor division.  The integer line of ZGlueTree6 stores its coordinate in the
# ``index`` field.
#
#   g = DAryTree(4)
#   v = child(g, VertexAddress(3, 5), 2)     # -> VertexAddress(4, 22)
#   neighbors(g, v)                          # parent first, then children


class Side(IntEnum):
    TREE = 0
    LINE = 1


class VertexAddress(NamedTuple):
    level: int
    index: int
    side: Side = Side.TREE


ROOT = VertexAddress(0, 0)


@dataclass(frozen=True)
class Parent:
    pass


@dataclass(frozen=True)
class Child:
    i: int


Move = Union[Parent, Child]


class _TreeFamily:
    """Shared arithmetic for the tree variants; subclasses fix the branching."""

    rooted: bool = True

    def children_count(self, level: int) -> int:
        raise NotImplementedError

    def width(self, level: int) -> int:
        """Number of vertices at ``level`` of a rooted tree."""
        w = 1
        for k in range(level):
            w *= self.children_count(k)
        return w

    def validate(self, v: VertexAddress) -> None:
        if v.side != Side.TREE:
            raise AddressError(f"{v} is not a tree vertex of {self}")
        if v.index < 0:
            raise AddressError(f"{v} has a negative horizontal index")
        if self.rooted:
            if v.level < 0:
                raise AddressError(f"{v} lies above the root of {self}")
            if v.index >= self.width(v.level):
                raise AddressError(f"{v} index exceeds the width of level {v.level}")

    def has_parent(self, v: VertexAddress) -> bool:
        return not self.rooted or v.level > 0

    def parent(self, v: VertexAddress) -> VertexAddress:
        if not self.has_parent(v):
            raise NavigationError(f"the root of {self} has no parent")
        return VertexAddress(v.level - 1, v.index // self.children_count(v.level - 1))

    def child(self, v: VertexAddress, i: int) -> VertexAddress:
        c = self.children_count(v.level)
        if not 0 <= i < c:
            raise NavigationError(f"child index {i} out of range 0..{c - 1} at {v}")
        return VertexAddress(v.level + 1, v.index * c + i)

    def neighbors(self, v: VertexAddress) -> List[VertexAddress]:
        out = [self.parent(v)] if self.has_parent(v) else []
        c = self.children_count(v.level)
        base = v.index * c
        out.extend(VertexAddress(v.level + 1, base + i) for i in range(c))
        return out

    def degree(self, v: VertexAddress) -> int:
        return self.children_count(v.level) + (1 if self.has_parent(v) else 0)

    def depth(self, v: VertexAddress) -> int:
        """Graph distance to the root, measured along levels."""
        return abs(v.level)

    def is_ancestor_of_root(self, v: VertexAddress) -> bool:
        return v.level < 0 and v.index == 0


@dataclass(frozen=True)
class DAryTree(_TreeFamily):
    """Rooted tree, every vertex has ``d`` children (root degree d, others d + 1)."""

    d: int

    def __post_init__(self):
        if self.d < 2:
            raise InputError(f"DAryTree needs d >= 2, got {self.d}")

    def children_count(self, level: int) -> int:
        return self.d

    def width(self, level: int) -> int:
        return self.d ** level


@dataclass(frozen=True)
class HomogeneousTree(_TreeFamily):
    """Every vertex has ``d`` children and one parent; levels run over all integers.

    The root sits at (0, 0) and its direct ancestors at (-k, 0).
    """

    d: int
    rooted = False

    def __post_init__(self):
        if self.d < 2:
            raise InputError(f"HomogeneousTree needs d >= 2, got {self.d}")

    def children_count(self, level: int) -> int:
        return self.d

    def siblings(self, v: VertexAddress) -> List[VertexAddress]:
        p = self.parent(v)
        return [w for w in self.neighbors(p)[1:] if w != v]


@dataclass(frozen=True)
class AlternatingTree56(_TreeFamily):
    """Rooted tree whose levels alternate between 5 and 6 children per vertex."""

    root_children: int = 5

    def __post_init__(self):
        if self.root_children not in (5, 6):
            raise InputError(f"root_children must be 5 or 6, got {self.root_children}")

    def children_count(self, level: int) -> int:
        return self.root_children if level % 2 == 0 else 11 - self.root_children


@dataclass(frozen=True)
class ZGlueTree6(_TreeFamily):
    """The integer line with its origin identified with the root of a 6-ary tree."""

    def children_count(self, level: int) -> int:
        return 6

    def width(self, level: int) -> int:
        return 6 ** level

    def validate(self, v: VertexAddress) -> None:
        if v.side == Side.LINE:
            if v.level != 0 or v.index == 0:
                raise AddressError(f"{v} is not a line vertex (the origin is the tree root)")
            return
        super().validate(v)

    def _line(self, x: int) -> VertexAddress:
        return ROOT if x == 0 else VertexAddress(0, x, Side.LINE)

    def has_parent(self, v: VertexAddress) -> bool:
        return v.side == Side.LINE or v.level > 0

    def parent(self, v: VertexAddress) -> VertexAddress:
        if v.side == Side.LINE:
            return self._line(v.index - 1 if v.index > 0 else v.index + 1)
        return super().parent(v)

    def child(self, v: VertexAddress, i: int) -> VertexAddress:
        if v.side == Side.LINE:
            if i != 0:
                raise NavigationError(f"line vertex {v} has a single outward neighbor")
            return self._line(v.index + 1 if v.index > 0 else v.index - 1)
        return super().child(v, i)

    def neighbors(self, v: VertexAddress) -> List[VertexAddress]:
        if v.side == Side.LINE:
            return [self.parent(v), self.child(v, 0)]
        if v == ROOT:
            return [self._line(-1), self._line(1)] + super().neighbors(v)
        return super().neighbors(v)

    def degree(self, v: VertexAddress) -> int:
        if v.side == Side.LINE:
            return 2
        return 8 if v == ROOT else 7

    def depth(self, v: VertexAddress) -> int:
        return abs(v.index) if v.side == Side.LINE else v.level


GraphKind = Union[DAryTree, HomogeneousTree, AlternatingTree56, ZGlueTree6]


def neighbors(g: GraphKind, v: VertexAddress) -> List[VertexAddress]:
    """Parent first (if any), then children in index order; length equals the degree."""
    g.validate(v)
    return g.neighbors(v)


def navigate(g: GraphKind, v: VertexAddress, move: Move) -> VertexAddress:
    g.validate(v)
    if isinstance(move, Parent):
        return g.parent(v)
    if isinstance(move, Child):
        return g.child(v, move.i)
    raise NavigationError(f"unknown move {move!r}")


def parent(g: GraphKind, v: VertexAddress) -> VertexAddress:
    return navigate(g, v, Parent())


def child(g: GraphKind, v: VertexAddress, i: int) -> VertexAddress:
    return navigate(g, v, Child(i))


def parse_graph(text: str) -> GraphKind:
    """Parse the command-line graph grammar: ``dary:D``, ``hom:D``, ``alt56:R``, ``zglue6``."""
    name, _, arg = text.strip().lower().partition(":")
    try:
        if name == "dary":
            return DAryTree(int(arg))
        if name == "hom":
            return HomogeneousTree(int(arg))
        if name == "alt56":
            return AlternatingTree56(int(arg) if arg else 5)
        if name == "zglue6" and not arg:
            return ZGlueTree6()
    except ValueError as e:
        raise InputError(f"bad graph parameter in {text!r}: {e}") from e
    raise InputError(f"unknown graph {text!r} (expected dary:D, hom:D, alt56:R or zglue6)")

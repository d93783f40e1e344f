"""Directed multigraph with stable arc ids, incidence operators, and minors.

Arcs are identified by their dense index into the arc list and keep that
identity forever: deleting or contracting arcs never renumbers the
survivors. Contraction state lives in a union-find over node ids; a
:class:`MinorView` is a read-only snapshot that maps surviving arcs onto
contraction-class representatives.

Sign convention for the incidence operator: the column of arc a = (v, w)
has -1 at the tail v and +1 at the head w, so a vector b with
``b = apply_incidence(g, x)`` reads "inflow minus outflow".
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

from .errors import InvariantError

__all__ = [
    "MultiGraph",
    "ContractionMap",
    "MinorView",
    "apply_incidence",
    "apply_incidence_transpose",
]


class MultiGraph:
    """Directed multigraph; parallel arcs and self-loops are permitted."""

    __slots__ = ("nodes", "arcs", "_node_set")

    def __init__(self, nodes: Iterable[int], arcs: Iterable[tuple[int, int]]) -> None:
        self.nodes: list[int] = list(nodes)
        self._node_set = frozenset(self.nodes)
        if len(self._node_set) != len(self.nodes):
            raise ValueError("duplicate node ids")
        self.arcs: list[tuple[int, int]] = []
        for tail, head in arcs:
            if tail not in self._node_set or head not in self._node_set:
                raise ValueError(f"arc ({tail}, {head}) references unknown node")
            self.arcs.append((tail, head))

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return len(self.arcs)

    def tail(self, a: int) -> int:
        return self.arcs[a][0]

    def head(self, a: int) -> int:
        return self.arcs[a][1]


def apply_incidence(g: MultiGraph, x: Sequence[int]) -> dict[int, int]:
    """Return b with b_v = sum of x over arcs into v minus arcs out of v.

    Self-loops contribute zero. The output always sums to zero because
    every arc contributes +x_a once and -x_a once.
    """
    b = {v: 0 for v in g.nodes}
    for a, (tail, head) in enumerate(g.arcs):
        xa = x[a]
        b[tail] -= xa
        b[head] += xa
    return b


def apply_incidence_transpose(g: MultiGraph, y: Mapping[int, int]) -> list[int]:
    """Return the arc vector with entry y_head - y_tail per arc."""
    return [y[head] - y[tail] for tail, head in g.arcs]


class ContractionMap:
    """Union-find over nodes plus the deleted / contracted arc sets.

    Deletion and contraction are never revoked. A contracted arc whose
    endpoints were already in one class is recorded all the same (the
    caller distinguishes the two cases via the return value of
    :meth:`contract`).
    """

    __slots__ = ("_parent", "_size", "deleted", "contracted")

    def __init__(self, g: MultiGraph) -> None:
        self._parent: dict[int, int] = {v: v for v in g.nodes}
        self._size: dict[int, int] = {v: 1 for v in g.nodes}
        self.deleted: set[int] = set()
        self.contracted: set[int] = set()

    def find(self, v: int) -> int:
        parent = self._parent
        root = v
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root

    def _check_fresh(self, a: int) -> None:
        if a in self.deleted:
            raise InvariantError(f"arc {a} already deleted")
        if a in self.contracted:
            raise InvariantError(f"arc {a} already contracted")

    def delete(self, a: int) -> None:
        self._check_fresh(a)
        self.deleted.add(a)

    def contract(self, a: int, tail: int, head: int) -> bool:
        """Record arc a as contracted, unioning its endpoint classes.

        Returns True when the arc merged two distinct classes (it then
        becomes an internal routing edge for the merged class) and False
        when its endpoints already shared a class (a chord).
        """
        self._check_fresh(a)
        self.contracted.add(a)
        rx, ry = self.find(tail), self.find(head)
        if rx == ry:
            return False
        # union by size; tie broken toward the smaller representative so
        # minor node identities are deterministic
        if self._size[rx] < self._size[ry] or (
            self._size[rx] == self._size[ry] and ry < rx
        ):
            rx, ry = ry, rx
        self._parent[ry] = rx
        self._size[rx] += self._size[ry]
        return True


class MinorView:
    """Read-only snapshot of the minor induced by a ContractionMap.

    ``arcs`` lists surviving arcs as (arc_id, tail_class, head_class) in
    arc-id order; a surviving arc whose endpoints share a class appears
    as a self-loop. ``nodes`` lists class representatives in first-seen
    order of the underlying node list, which keeps every downstream
    iteration deterministic.
    """

    __slots__ = ("graph", "nodes", "arcs", "class_of")

    def __init__(self, g: MultiGraph, cmap: ContractionMap) -> None:
        self.graph = g
        self.class_of: dict[int, int] = {v: cmap.find(v) for v in g.nodes}
        seen: dict[int, None] = {}
        for v in g.nodes:
            seen.setdefault(self.class_of[v], None)
        self.nodes: list[int] = list(seen)
        dead_d, dead_c = cmap.deleted, cmap.contracted
        self.arcs: list[tuple[int, int, int]] = [
            (a, self.class_of[tail], self.class_of[head])
            for a, (tail, head) in enumerate(g.arcs)
            if a not in dead_d and a not in dead_c
        ]

    @property
    def m_h(self) -> int:
        return len(self.arcs)

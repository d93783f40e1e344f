"""DIMACS min-cost-flow text format.

Instances::

    c comment
    p min <nodes> <arcs>
    n <node> <supply>
    a <tail> <head> <low> <cap> <cost>

Nodes are 1..<nodes>. A positive supply means the node produces flow, a
negative one means it consumes; internally demands are stored as net
inflow, so b_v = -supply_v. Lower bounds must be 0 and capacities must
be at least 1. Solutions::

    s <objective>
    f <tail> <head> <flow>
    y <node> <potential>

``f`` lines appear in the instance's arc order, which is what makes
parallel arcs unambiguous.
"""

from __future__ import annotations

from .errors import FormatError, UnsupportedFeatureError
from .graph_core import MultiGraph
from .instance_pipeline import RawInstance

__all__ = [
    "parse_instance",
    "format_instance",
    "parse_solution",
    "format_solution",
]


def parse_instance(text: str) -> RawInstance:
    n_nodes = n_arcs = None
    supplies: dict[int, int] = {}
    arcs: list[tuple[int, int]] = []
    caps: list[int] = []
    costs: list[int] = []
    for lineno, raw_line in enumerate(text.splitlines(), 1):
        line = raw_line.strip()
        if not line or line.startswith("c"):
            continue
        fields = line.split()
        kind = fields[0]
        try:
            if kind == "p":
                if n_nodes is not None:
                    raise FormatError(f"line {lineno}: second problem line")
                if len(fields) != 4 or fields[1] != "min":
                    raise FormatError(f"line {lineno}: expected 'p min <n> <m>'")
                n_nodes, n_arcs = int(fields[2]), int(fields[3])
                if n_nodes < 1 or n_arcs < 0:
                    raise FormatError(f"line {lineno}: bad problem dimensions")
            elif kind == "n":
                if n_nodes is None:
                    raise FormatError(f"line {lineno}: node line before problem line")
                if len(fields) != 3:
                    raise FormatError(f"line {lineno}: expected 'n <node> <supply>'")
                v, supply = int(fields[1]), int(fields[2])
                if not 1 <= v <= n_nodes:
                    raise FormatError(f"line {lineno}: node {v} out of range")
                if v in supplies:
                    raise FormatError(f"line {lineno}: duplicate supply for node {v}")
                supplies[v] = supply
            elif kind == "a":
                if n_nodes is None:
                    raise FormatError(f"line {lineno}: arc line before problem line")
                if len(fields) != 6:
                    raise FormatError(
                        f"line {lineno}: expected 'a <tail> <head> <low> <cap> <cost>'")
                tail, head, low, cap, cost = map(int, fields[1:])
                if not (1 <= tail <= n_nodes and 1 <= head <= n_nodes):
                    raise FormatError(f"line {lineno}: arc endpoint out of range")
                if low != 0:
                    raise UnsupportedFeatureError(
                        f"line {lineno}: nonzero lower bounds are not supported")
                if cap < 1:
                    raise FormatError(
                        f"line {lineno}: capacity must be at least 1")
                arcs.append((tail, head))
                caps.append(cap)
                costs.append(cost)
            else:
                raise FormatError(f"line {lineno}: unknown record type {kind!r}")
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
    if n_nodes is None:
        raise FormatError("missing problem line")
    if len(arcs) != n_arcs:
        raise FormatError(f"problem line promises {n_arcs} arcs, found {len(arcs)}")
    if sum(supplies.values()) != 0:
        raise FormatError("supplies do not sum to zero")
    b = {v: -supplies.get(v, 0) for v in range(1, n_nodes + 1)}
    return RawInstance(MultiGraph(list(range(1, n_nodes + 1)), arcs), b,
                       caps, costs)


def format_instance(inst: RawInstance, comment: str | None = None) -> str:
    lines = []
    if comment:
        for row in comment.splitlines():
            lines.append(f"c {row}")
    lines.append(f"p min {inst.graph.n} {inst.graph.m}")
    for v in inst.graph.nodes:
        if inst.b[v]:
            lines.append(f"n {v} {-inst.b[v]}")
    for a, (tail, head) in enumerate(inst.graph.arcs):
        lines.append(f"a {tail} {head} 0 {inst.u[a]} {inst.c[a]}")
    return "\n".join(lines) + "\n"


def format_solution(inst: RawInstance, objective: int, flow: list[int],
                    potentials: dict[int, int]) -> str:
    lines = [f"s {objective}"]
    for a, (tail, head) in enumerate(inst.graph.arcs):
        lines.append(f"f {tail} {head} {flow[a]}")
    for v in inst.graph.nodes:
        lines.append(f"y {v} {potentials[v]}")
    return "\n".join(lines) + "\n"


def parse_solution(text: str, inst: RawInstance
                   ) -> tuple[int, list[int], dict[int, int]]:
    """Read a solution against its instance; flow lines are matched to
    arcs in order of appearance."""
    objective = None
    flow: list[int] = []
    potentials: dict[int, int] = {}
    for lineno, raw_line in enumerate(text.splitlines(), 1):
        line = raw_line.strip()
        if not line or line.startswith("c"):
            continue
        fields = line.split()
        try:
            if fields[0] == "s":
                if objective is not None:
                    raise FormatError(f"line {lineno}: second objective line")
                objective = int(fields[1])
            elif fields[0] == "f":
                if len(fields) != 4:
                    raise FormatError(f"line {lineno}: expected 'f <tail> <head> <flow>'")
                tail, head, value = int(fields[1]), int(fields[2]), int(fields[3])
                a = len(flow)
                if a >= inst.graph.m or inst.graph.arcs[a] != (tail, head):
                    raise FormatError(
                        f"line {lineno}: flow lines must follow the instance's "
                        "arc order")
                flow.append(value)
            elif fields[0] == "y":
                if len(fields) != 3:
                    raise FormatError(f"line {lineno}: expected 'y <node> <potential>'")
                potentials[int(fields[1])] = int(fields[2])
            else:
                raise FormatError(f"line {lineno}: unknown record type {fields[0]!r}")
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
    if objective is None:
        raise FormatError("missing objective line")
    if len(flow) != inst.graph.m:
        raise FormatError(f"expected {inst.graph.m} flow lines, found {len(flow)}")
    missing = [v for v in inst.graph.nodes if v not in potentials]
    if missing:
        raise FormatError(f"missing potentials for nodes {missing}")
    return objective, flow, potentials

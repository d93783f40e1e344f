"""Slow, independent min-cost flow reference implementations.

This module exists so the main solver can be checked against code that
shares none of its machinery: a textbook successive-shortest-path solver
driven by Bellman-Ford on the residual network, a brute-force lattice
enumerator for tiny instances, exhaustive certificate verification, and
a seeded random instance generator.

Nothing here is performance-sensitive; clarity wins every trade-off.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .graph_core import MultiGraph
from .instance_pipeline import RawInstance

__all__ = [
    "OracleSolution",
    "CertificateReport",
    "ssp_solve",
    "verify_certificate",
    "brute_force_optimum",
    "has_unique_support",
    "random_instance",
]

_INF = float("inf")


@dataclass
class OracleSolution:
    status: str  # "optimal" | "infeasible"
    flow: list[int] | None
    objective: int | None
    potentials: dict[int, int] | None


@dataclass
class CertificateReport:
    ok: bool
    failures: list[str]
    objective: int | None


def _residual_arcs(inst: RawInstance, flow: list[int],
                   source_cap: dict[int, int], sink_need: dict[int, int]):
    """Residual arcs as (tail, head, capacity, cost, arc_id, forward).

    Node 's' is the super source, 't' the super sink; arc_id is None for
    super arcs. Both super-arc capacity dicts shrink as flow is pushed.
    """
    res = []
    for a, (v, w) in enumerate(inst.graph.arcs):
        if flow[a] < inst.u[a]:
            res.append((v, w, inst.u[a] - flow[a], inst.c[a], a, True))
        if flow[a] > 0:
            res.append((w, v, flow[a], -inst.c[a], a, False))
    for v, cap in source_cap.items():
        if cap > 0:
            res.append(("s", v, cap, 0, None, True))
    for v, need in sink_need.items():
        if need > 0:
            res.append((v, "t", need, 0, None, True))
    return res


def _bellman_ford(nodes, res, source):
    dist = {v: _INF for v in nodes}
    pred = {}
    dist[source] = 0
    for _ in range(len(nodes)):
        changed = False
        for tail, head, cap, cost, aid, fwd in res:
            if dist[tail] is not _INF and dist[tail] + cost < dist[head]:
                dist[head] = dist[tail] + cost
                pred[head] = (tail, cap, aid, fwd)
                changed = True
        if not changed:
            break
    else:
        raise AssertionError("negative cycle in residual network")
    return dist, pred


def ssp_solve(inst: RawInstance) -> OracleSolution:
    """Successive shortest paths from scratch, all integer arithmetic.

    Negative arc costs are handled by pre-saturating those arcs (flow
    starts at u_a there), which makes every residual network free of
    negative cycles; Bellman-Ford then finds exact shortest paths.
    Returned potentials satisfy the three-way complementary slackness
    conditions together with the returned flow.
    """
    inst.validate()
    flow = [inst.u[a] if inst.c[a] < 0 else 0 for a in range(inst.graph.m)]
    # supply still owed by each node after the pre-saturation
    owed: dict[int, int] = {v: -d for v, d in inst.b.items()}
    for a, (v, w) in enumerate(inst.graph.arcs):
        if flow[a]:
            owed[v] -= flow[a]
            owed[w] += flow[a]
    source_cap = {v: k for v, k in owed.items() if k > 0}
    sink_need = {v: -k for v, k in owed.items() if k < 0}

    nodes = list(inst.graph.nodes) + ["s", "t"]
    while sum(source_cap.values()) > 0:
        res = _residual_arcs(inst, flow, source_cap, sink_need)
        dist, pred = _bellman_ford(nodes, res, "s")
        if dist["t"] is _INF:
            return OracleSolution("infeasible", None, None, None)
        # walk the path backwards, find the bottleneck, then push
        path = []
        v = "t"
        while v != "s":
            tail, cap, aid, fwd = pred[v]
            path.append((tail, v, cap, aid, fwd))
            v = tail
        push = min(cap for _, _, cap, _, _ in path)
        for tail, head, _, aid, fwd in path:
            if aid is None:
                if tail == "s":
                    source_cap[head] -= push
                else:
                    sink_need[tail] -= push
            elif fwd:
                flow[aid] += push
            else:
                flow[aid] -= push

    potentials = _final_potentials(inst, flow)
    objective = sum(f * cost for f, cost in zip(flow, inst.c))
    return OracleSolution("optimal", flow, objective, potentials)


def _final_potentials(inst: RawInstance, flow: list[int]) -> dict[int, int]:
    """Feasible node potentials for the final residual network.

    Runs Bellman-Ford from a virtual root tied to every node at cost 0;
    the resulting distances p satisfy p_w <= p_v + c for every residual
    arc (v, w, c), which is exactly three-way complementary slackness
    for (flow, p).
    """
    res = [(v, w, inst.u[a] - flow[a], inst.c[a], a, True)
           for a, (v, w) in enumerate(inst.graph.arcs) if flow[a] < inst.u[a]]
    res += [(w, v, flow[a], -inst.c[a], a, False)
            for a, (v, w) in enumerate(inst.graph.arcs) if flow[a] > 0]
    dist = {v: 0 for v in inst.graph.nodes}
    for _ in range(len(dist)):
        changed = False
        for tail, head, _, cost, _, _ in res:
            if dist[tail] + cost < dist[head]:
                dist[head] = dist[tail] + cost
                changed = True
        if not changed:
            break
    else:
        raise AssertionError("negative cycle in optimal residual network")
    return dist


def verify_certificate(inst: RawInstance, flow: list[int],
                       potentials: dict[int, int]) -> CertificateReport:
    """Check a primal-dual optimality certificate exactly.

    Conditions: capacity bounds, flow conservation, and for each arc the
    three-way slackness on the reduced cost rc = c - (p_head - p_tail):
    rc > 0 forces flow 0, rc < 0 forces flow u, rc = 0 allows anything.
    """
    failures: list[str] = []
    g = inst.graph
    if len(flow) != g.m:
        return CertificateReport(False, ["flow vector has wrong length"], None)
    for a in range(g.m):
        if not 0 <= flow[a] <= inst.u[a]:
            failures.append(f"arc {a}: flow {flow[a]} outside [0, {inst.u[a]}]")
    net = {v: 0 for v in g.nodes}
    for a, (v, w) in enumerate(g.arcs):
        net[v] -= flow[a]
        net[w] += flow[a]
    for v in g.nodes:
        if net[v] != inst.b[v]:
            failures.append(f"node {v}: net inflow {net[v]} != demand {inst.b[v]}")
    for a, (v, w) in enumerate(g.arcs):
        rc = inst.c[a] - (potentials[w] - potentials[v])
        if rc > 0 and flow[a] != 0:
            failures.append(f"arc {a}: positive reduced cost {rc} but flow {flow[a]}")
        if rc < 0 and flow[a] != inst.u[a]:
            failures.append(f"arc {a}: negative reduced cost {rc} but slack capacity")
    objective = sum(f * cost for f, cost in zip(flow, inst.c))
    return CertificateReport(not failures, failures, objective)


def brute_force_optimum(inst: RawInstance) -> tuple[int | None, list[list[int]]]:
    """Enumerate every integer flow in the capacity box; return the
    optimal objective (None if infeasible) and all optimal flows.

    Exponential in sum(u); intended for instances with a handful of arcs
    and single-digit capacities.
    """
    inst.validate()
    best: int | None = None
    argbest: list[list[int]] = []
    for candidate in itertools.product(*(range(cap + 1) for cap in inst.u)):
        net = {v: 0 for v in inst.graph.nodes}
        for a, (v, w) in enumerate(inst.graph.arcs):
            net[v] -= candidate[a]
            net[w] += candidate[a]
        if any(net[v] != inst.b[v] for v in inst.graph.nodes):
            continue
        obj = sum(f * cost for f, cost in zip(candidate, inst.c))
        if best is None or obj < best:
            best, argbest = obj, [list(candidate)]
        elif obj == best:
            argbest.append(list(candidate))
    return best, argbest


def _drop_arc(inst: RawInstance, a: int) -> RawInstance:
    arcs = [arc for i, arc in enumerate(inst.graph.arcs) if i != a]
    u = [cap for i, cap in enumerate(inst.u) if i != a]
    c = [cost for i, cost in enumerate(inst.c) if i != a]
    return RawInstance(MultiGraph(inst.graph.nodes, arcs), dict(inst.b), u, c)


def has_unique_support(inst: RawInstance, sol: OracleSolution) -> bool:
    """True when every optimal flow has the same support as sol.flow.

    For each arc in the support, re-solve with the arc removed; for each
    arc outside it, re-solve with one unit forced through the arc. Any
    re-solve that matches the optimal objective exhibits an optimum with
    a different support.
    """
    assert sol.status == "optimal" and sol.flow is not None
    for a, (v, w) in enumerate(inst.graph.arcs):
        if sol.flow[a] > 0:
            sub = _drop_arc(inst, a)
            alt = ssp_solve(sub)
            if alt.status == "optimal" and alt.objective == sol.objective:
                return False
        else:
            # pre-route one unit: demands shift and the arc shrinks
            b = dict(inst.b)
            b[v] += 1
            b[w] -= 1
            if inst.u[a] == 1:
                sub = _drop_arc(inst, a)
                sub = RawInstance(sub.graph, b, sub.u, sub.c)
            else:
                u = list(inst.u)
                u[a] -= 1
                sub = RawInstance(MultiGraph(inst.graph.nodes, inst.graph.arcs),
                                  b, u, list(inst.c))
            alt = ssp_solve(sub)
            if alt.status == "optimal" and alt.objective + inst.c[a] == sol.objective:
                return False
    return True


def random_instance(seed: int, n: int, m: int, U_max: int, C_max: int,
                    mode: str = "feasible") -> RawInstance:
    """Seeded random instance on nodes 1..n with m arcs.

    The first n-1 arcs form a random spanning tree with random
    orientations, so the graph is always weakly connected; the rest are
    uniform random pairs, occasionally producing self-loops and parallel
    arcs. Costs are uniform in [-C_max, C_max].

    mode "feasible" draws a random flow in the capacity box and uses its
    boundary as the demand vector, so a feasible flow exists by
    construction. mode "random" perturbs demands by random transfers and
    may be infeasible.
    """
    if n < 2:
        raise ValueError("need at least two nodes")
    if m < n - 1:
        raise ValueError("need at least n - 1 arcs for weak connectivity")
    if mode not in ("feasible", "random"):
        raise ValueError(f"unknown mode {mode!r}")
    rng = random.Random(seed)
    arcs: list[tuple[int, int]] = []
    for v in range(2, n + 1):
        p = rng.randint(1, v - 1)
        arcs.append((p, v) if rng.random() < 0.5 else (v, p))
    for _ in range(m - (n - 1)):
        v = rng.randint(1, n)
        w = rng.randint(1, n)  # v == w is allowed: self-loop
        arcs.append((v, w))
    u = [rng.randint(1, U_max) for _ in range(m)]
    c = [rng.randint(-C_max, C_max) for _ in range(m)]
    b = {v: 0 for v in range(1, n + 1)}
    if mode == "feasible":
        for a, (v, w) in enumerate(arcs):
            f = rng.randint(0, u[a])
            b[v] -= f
            b[w] += f
    else:
        for _ in range(n):
            v = rng.randint(1, n)
            w = rng.randint(1, n)
            amt = rng.randint(0, U_max)
            b[v] -= amt
            b[w] += amt
    return RawInstance(MultiGraph(list(range(1, n + 1)), arcs), b, u, c)

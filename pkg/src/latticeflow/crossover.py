"""Rounding the near-optimal interior point to an exact optimum.

The interior point method stops with a tiny duality gap on a perturbed
version of the instance: deleted arcs have their (negligible) flow
folded into the demands, contracted arcs their (negligible) slack folded
into the costs. This module finishes the job in three exact moves:

1. nested cuts: starting from the lowest node, grow a set S one node at
   a time, shifting the duals uniformly on S until some crossing arc's
   perturbed reduced cost hits zero; that arc joins a spanning tree T.
   The perturbed dual objective never decreases, so the final duals are
   optimal for the perturbed instance.
2. tree lift: re-derive duals from T against the *original* costs,
   which are multiples of gamma; the perturbation is smaller than gamma,
   so the lifted reduced costs are still nonnegative, now exactly
   complementary to T.
3. admissible flow: one max-flow over the zero-reduced-cost arcs routes
   the original demands; saturation yields an exactly optimal integral
   pair, checked by a five-point certificate.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvariantError
from .graph_core import apply_incidence, apply_incidence_transpose
from .instance_pipeline import AuxiliaryInstance, ScalingCertificate
from .ipm_driver import IPMResult

__all__ = [
    "PerturbedPoint",
    "build_perturbed",
    "nested_cut_crossover",
    "lift_tree_duals",
    "admissible_max_flow",
    "verify_aux_certificate",
    "crossover",
]


@dataclass
class PerturbedPoint:
    b_hat: dict[int, int]
    c_hat: list[int]
    x_hat: list[int]
    s_hat: list[int]


def build_perturbed(aux: AuxiliaryInstance, cert: ScalingCertificate,
                    res: IPMResult) -> PerturbedPoint:
    """Fold the residue of deleted and contracted arcs into demands and
    costs, and check the folds stay below the crossover's tolerance:
    the demand shift under 2 * (7/9) beta, the cost shift under
    (7/9) gamma, both as exact cross-multiplied comparisons."""
    g = aux.graph
    deleted_flow = [res.x[a] if a in res.cmap.deleted else 0
                    for a in range(g.m)]
    shift = apply_incidence(g, deleted_flow)
    b_hat = {v: aux.b[v] - shift[v] for v in g.nodes}
    c_hat = list(aux.c)
    x_hat = list(res.x)
    s_hat = list(res.s)
    for a in res.cmap.contracted:
        c_hat[a] -= res.s[a]
        s_hat[a] = 0
    for a in res.cmap.deleted:
        x_hat[a] = 0

    demand_shift = sum(abs(shift[v]) for v in g.nodes)
    if 9 * demand_shift > 14 * cert.beta:
        raise InvariantError(
            f"deleted flow moved the demands by {demand_shift}, beyond the "
            "crossover tolerance")
    cost_shift = sum(res.s[a] for a in res.cmap.contracted)
    if 9 * cost_shift > 7 * cert.gamma:
        raise InvariantError(
            f"contracted slack moved the costs by {cost_shift}, beyond the "
            "crossover tolerance")
    for a in range(g.m):
        if s_hat[a] < 0:
            raise InvariantError(f"arc {a}: perturbed reduced cost negative")
        if x_hat[a] < 0:
            raise InvariantError(f"arc {a}: perturbed flow negative")
    return PerturbedPoint(b_hat, c_hat, x_hat, s_hat)


def nested_cut_crossover(aux: AuxiliaryInstance, pert: PerturbedPoint,
                         y: dict[int, int],
                         objective_log: list[int] | None = None,
                         ) -> tuple[dict[int, int], list[int]]:
    """Grow S from the lowest node to an optimal perturbed dual.

    Each step shifts y uniformly on S: up when S wants net inflow
    (b_hat(S) >= 0, tightening an entering arc), down when it wants net
    outflow (tightening a leaving arc). The tightened arc joins the tree
    and its far endpoint joins S. Ties break to the smallest arc id, and
    the perturbed dual objective b_hat . y is checked to never decrease.
    When given, objective_log receives that objective after every step.
    """
    g = aux.graph
    y = dict(y)
    s_hat = list(pert.s_hat)
    start = min(g.nodes)
    in_s = {start}
    tree: list[int] = []
    objective = sum(pert.b_hat[v] * y[v] for v in g.nodes)
    if objective_log is not None:
        objective_log.append(objective)
    b_s = pert.b_hat[start]
    while len(in_s) < g.n:
        entering = [a for a, (t, h) in enumerate(g.arcs)
                    if (h in in_s) != (t in in_s) and h in in_s]
        leaving = [a for a, (t, h) in enumerate(g.arcs)
                   if (h in in_s) != (t in in_s) and t in in_s]
        if b_s >= 0 and entering:
            sign, cands = 1, entering
        elif b_s > 0:
            raise InvariantError(
                "cut wants inflow but no arc enters it; the perturbed "
                "instance cannot be feasible")
        elif leaving:
            sign, cands = -1, leaving
        else:
            raise InvariantError(
                "cut wants outflow but no arc leaves it; the perturbed "
                "instance cannot be feasible")
        theta = min(s_hat[a] for a in cands)
        if theta < 0:
            raise InvariantError("negative reduced cost reached the crossover")
        chosen = min(a for a in cands if s_hat[a] == theta)
        for v in in_s:
            y[v] += sign * theta
        for a in entering:
            s_hat[a] -= sign * theta
        for a in leaving:
            s_hat[a] += sign * theta
        new_objective = objective + sign * theta * b_s
        if new_objective < objective:
            raise InvariantError("perturbed dual objective decreased")
        objective = new_objective
        if objective_log is not None:
            objective_log.append(objective)
        tree.append(chosen)
        t, h = g.arcs[chosen]
        joined = t if h in in_s else h
        in_s.add(joined)
        b_s += pert.b_hat[joined]
    for a in tree:
        if s_hat[a] != 0:
            raise InvariantError(f"tree arc {a} drifted off its tight cut")
    return y, tree


def lift_tree_duals(aux: AuxiliaryInstance, cert: ScalingCertificate,
                    tree: list[int]) -> tuple[dict[int, int], list[int]]:
    """Duals read off the crossover tree against the original costs.

    Original costs are multiples of gamma while the cost perturbation is
    smaller than gamma, so rounding the perturbed-optimal duals to the
    tree keeps every reduced cost nonnegative; this is checked exactly,
    along with gamma-integrality and tightness on the tree."""
    g = aux.graph
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in g.nodes}
    for a in tree:
        t, h = g.arcs[a]
        adj[t].append((a, h))
        adj[h].append((a, t))
    root = min(g.nodes)
    y_t: dict[int, int] = {root: 0}
    stack = [root]
    while stack:
        v = stack.pop()
        for a, other in adj[v]:
            if other in y_t:
                continue
            t, h = g.arcs[a]
            # tree arcs are tight: c_a = y_head - y_tail
            y_t[other] = y_t[v] + aux.c[a] if h == other else y_t[v] - aux.c[a]
            stack.append(other)
    if len(y_t) != g.n:
        raise InvariantError("crossover tree does not span the instance")
    s_t = [aux.c[a] - d
           for a, d in enumerate(apply_incidence_transpose(g, y_t))]
    for a in range(g.m):
        if s_t[a] < 0:
            raise InvariantError(
                f"arc {a}: tree dual lift left a negative reduced cost")
        if s_t[a] % cert.gamma:
            raise InvariantError(
                f"arc {a}: lifted reduced cost is not a gamma multiple")
    for a in tree:
        if s_t[a] != 0:
            raise InvariantError(f"tree arc {a} is not tight after the lift")
    return y_t, s_t


def _dinic(nodes: list, arcs: list[tuple[object, object, int]],
           source, sink) -> tuple[int, list[int]]:
    """Max flow via level graphs and blocking flows; returns the value
    and per-input-arc flows. Arbitrary-size integer capacities."""
    # adjacency of (to, cap, index-of-reverse); arcs stored flat
    graph: dict = {v: [] for v in nodes}

    flat: list[list] = []  # [to, cap]

    def add(frm, to, cap):
        graph[frm].append(len(flat))
        flat.append([to, cap])
        graph[to].append(len(flat))
        flat.append([frm, 0])

    for t, h, cap in arcs:
        add(t, h, cap)

    total = 0
    while True:
        level = {source: 0}
        queue = [source]
        qi = 0
        while qi < len(queue):
            v = queue[qi]
            qi += 1
            for ei in graph[v]:
                to, cap = flat[ei]
                if cap > 0 and to not in level:
                    level[to] = level[v] + 1
                    queue.append(to)
        if sink not in level:
            break
        it = {v: 0 for v in nodes}

        def dfs(v, limit):
            if v == sink:
                return limit
            while it[v] < len(graph[v]):
                ei = graph[v][it[v]]
                to, cap = flat[ei]
                if cap > 0 and level.get(to, -1) == level[v] + 1:
                    pushed = dfs(to, min(limit, cap))
                    if pushed:
                        flat[ei][1] -= pushed
                        flat[ei ^ 1][1] += pushed
                        return pushed
                it[v] += 1
            return 0

        while True:
            pushed = dfs(source, 1 << 512)
            if not pushed:
                break
            total += pushed
    flows = [flat[2 * i + 1][1] for i in range(len(arcs))]
    return total, flows


def admissible_max_flow(aux: AuxiliaryInstance, s_t: list[int]) -> list[int]:
    """Route the original demands through the arcs the lifted duals
    price at zero. The demands must saturate exactly; integral flows
    come out of the max-flow for free."""
    g = aux.graph
    admissible = [a for a in range(g.m) if s_t[a] == 0]
    supply = sum(-d for d in aux.b.values() if d < 0)
    arcs: list[tuple[object, object, int]] = []
    for v, d in aux.b.items():
        if d < 0:
            arcs.append(("source", v, -d))
        elif d > 0:
            arcs.append((v, "sink", d))
    offset = len(arcs)
    for a in admissible:
        t, h = g.arcs[a]
        arcs.append((t, h, supply))
    value, flows = _dinic(list(g.nodes) + ["source", "sink"], arcs,
                          "source", "sink")
    if value != supply:
        raise InvariantError(
            f"admissible arcs carry only {value} of {supply} demand units")
    x_star = [0] * g.m
    for i, a in enumerate(admissible):
        x_star[a] = flows[offset + i]
    return x_star


def verify_aux_certificate(aux: AuxiliaryInstance, x_star: list[int],
                           y_t: dict[int, int], s_t: list[int]) -> None:
    """The five exact optimality checks on the rounded pair."""
    g = aux.graph
    if apply_incidence(g, x_star) != aux.b:
        raise InvariantError("rounded flow violates conservation")
    dual = apply_incidence_transpose(g, y_t)
    if any(aux.c[a] - dual[a] != s_t[a] for a in range(g.m)):
        raise InvariantError("rounded duals are inconsistent")
    if any(v < 0 for v in s_t):
        raise InvariantError("rounded reduced cost negative")
    if any(v < 0 for v in x_star):
        raise InvariantError("rounded flow negative")
    if any(x_star[a] * s_t[a] for a in range(g.m)):
        raise InvariantError("rounded pair is not complementary")


def crossover(aux: AuxiliaryInstance, cert: ScalingCertificate,
              res: IPMResult) -> tuple[list[int], dict[int, int], list[int]]:
    """Full rounding: perturb, nested cuts, tree lift, admissible flow,
    certificate. Returns (x_star, y_t, s_t) on the auxiliary instance."""
    pert = build_perturbed(aux, cert, res)
    _, tree = nested_cut_crossover(aux, pert, res.y)
    y_t, s_t = lift_tree_duals(aux, cert, tree)
    x_star = admissible_max_flow(aux, s_t)
    verify_aux_certificate(aux, x_star, y_t, s_t)
    return x_star, y_t, s_t

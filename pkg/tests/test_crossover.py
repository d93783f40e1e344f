"""Hand-simulated nested cuts, the max-flow core, and a full
pipeline-to-certificate run checked against the reference oracle."""

from random import Random

import pytest

from latticeflow.crossover import (
    _dinic,
    admissible_max_flow,
    build_perturbed,
    crossover,
    lift_tree_duals,
    nested_cut_crossover,
    verify_aux_certificate,
    PerturbedPoint,
)
from latticeflow.errors import InvariantError
from latticeflow.graph_core import ContractionMap, MultiGraph
from latticeflow.instance_pipeline import (
    AuxiliaryInstance,
    RawInstance,
    build_auxiliary,
    compute_scaling,
    downscale,
    normalize_costs,
    scale_up,
)
from latticeflow.ipm_driver import IPMResult, run_interior_point
from latticeflow.reference_oracle import ssp_solve

GAMMA = compute_scaling(1, 1, 1).gamma


def _aux(nodes, arcs, b, c):
    return AuxiliaryInstance(graph=MultiGraph(nodes, arcs), b=b, c=c,
                             provenance=[("up", i) for i in range(len(arcs))],
                             arc_node={}, up_arc={}, down_arc={})


def test_dinic_bottleneck():
    # two parallel source arcs into one capacity-4 pipe
    value, flows = _dinic(["s", "a", "t"],
                          [("s", "a", 2), ("s", "a", 3), ("a", "t", 4)],
                          "s", "t")
    assert value == 4
    assert flows[0] + flows[1] == 4
    assert flows[2] == 4


def test_dinic_diamond():
    arcs = [("s", 1, 3), ("s", 2, 3), (1, "t", 2), (2, "t", 2), (1, 2, 5)]
    value, flows = _dinic(["s", 1, 2, "t"], arcs, "s", "t")
    assert value == 4
    assert all(f >= 0 for f in flows)


def _path_pert():
    aux = _aux([1, 2, 3], [(1, 2), (2, 3), (1, 3)], {1: -2, 2: 0, 3: 2},
               [3 * GAMMA, 5 * GAMMA, 10 * GAMMA])
    pert = PerturbedPoint(b_hat=dict(aux.b), c_hat=list(aux.c),
                          x_hat=[2, 2, 0], s_hat=list(aux.c))
    return aux, pert


def test_nested_cuts_hand_simulation():
    # S = {1} wants outflow, so y drops on S until arc 0 is tight; then
    # S = {1, 2} drops again until arc 1 is tight
    aux, pert = _path_pert()
    y, tree = nested_cut_crossover(aux, pert, {1: 0, 2: 0, 3: 0})
    assert tree == [0, 1]
    assert y == {1: -8 * GAMMA, 2: -5 * GAMMA, 3: 0}
    # perturbed dual objective: -2 * -8g + 2 * 0 = 16g
    assert sum(pert.b_hat[v] * y[v] for v in aux.graph.nodes) == 16 * GAMMA


def test_nested_cuts_objective_log_is_monotone():
    aux, pert = _path_pert()
    log = []
    nested_cut_crossover(aux, pert, {1: 0, 2: 0, 3: 0}, objective_log=log)
    # one entry before the walk plus one per grown node
    assert len(log) == aux.graph.n
    assert log == sorted(log)
    assert log[0] == 0 and log[-1] == 16 * GAMMA


def test_nested_cuts_tie_breaks_to_lowest_arc_id():
    aux = _aux([1, 2], [(1, 2), (1, 2)], {1: -1, 2: 1}, [GAMMA, GAMMA])
    pert = PerturbedPoint(dict(aux.b), list(aux.c), [1, 0], list(aux.c))
    _, tree = nested_cut_crossover(aux, pert, {1: 0, 2: 0})
    assert tree == [0]


def test_tree_lift_and_admissible_flow():
    aux, pert = _path_pert()
    y, tree = nested_cut_crossover(aux, pert, {1: 0, 2: 0, 3: 0})
    y_t, s_t = lift_tree_duals(aux, compute_scaling(1, 1, 1), tree)
    assert y_t == {1: 0, 2: 3 * GAMMA, 3: 8 * GAMMA}
    assert s_t == [0, 0, 2 * GAMMA]
    x_star = admissible_max_flow(aux, s_t)
    assert x_star == [2, 2, 0]
    verify_aux_certificate(aux, x_star, y_t, s_t)


def test_admissible_flow_requires_saturation():
    # only the expensive arc is admissible and it points the wrong way
    aux = _aux([1, 2], [(1, 2), (2, 1)], {1: -1, 2: 1}, [GAMMA, 0])
    with pytest.raises(InvariantError):
        admissible_max_flow(aux, [GAMMA, 0])


def test_verify_rejects_noncomplementary_pairs():
    aux, pert = _path_pert()
    y, tree = nested_cut_crossover(aux, pert, {1: 0, 2: 0, 3: 0})
    y_t, s_t = lift_tree_duals(aux, compute_scaling(1, 1, 1), tree)
    with pytest.raises(InvariantError):
        verify_aux_certificate(aux, [1, 1, 1], y_t, s_t)


def _pipeline(inst, seed=0):
    norm, rev = normalize_costs(inst)
    down, info = downscale(norm)
    cert = compute_scaling(down.graph.m, info.U, info.C,
                           beta0=info.beta0, gamma0=info.gamma0)
    scaled = scale_up(down, cert)
    aux, point = build_auxiliary(scaled, cert)
    res = run_interior_point(aux, cert, point, rng=Random(seed))
    return aux, cert, res, down, rev


E1 = RawInstance(MultiGraph([1, 2, 3], [(1, 2), (2, 3), (1, 3)]),
                 {1: -2, 2: 0, 3: 2}, [2, 2, 1], [1, 1, 3])


def test_full_crossover_matches_oracle():
    aux, cert, res, down, rev = _pipeline(E1)
    x_star, y_t, s_t = crossover(aux, cert, res)
    # no balancing arc carries flow: the instance is feasible
    assert all(x_star[h] == 0 for h in aux.hat_arc.values())
    # per original arc, the up/down pair splits the scaled capacity
    flow = []
    for i in range(down.graph.m):
        up = x_star[aux.up_arc[i]]
        dn = x_star[aux.down_arc[i]]
        assert up % cert.beta == 0
        assert up + dn == down.u[i] * cert.beta
        flow.append(up // cert.beta)
    assert rev == []
    oracle = ssp_solve(down)
    got = sum(f * c for f, c in zip(flow, down.c))
    assert got == oracle.objective


def test_build_perturbed_folds_and_checks():
    aux, cert, res, down, rev = _pipeline(E1)
    pert = build_perturbed(aux, cert, res)
    g = aux.graph
    for a in range(g.m):
        if a in res.cmap.contracted:
            assert pert.c_hat[a] == aux.c[a] - res.s[a]
            assert pert.s_hat[a] == 0
        else:
            assert pert.c_hat[a] == aux.c[a]
        if a in res.cmap.deleted:
            assert pert.x_hat[a] == 0
    # folds stay inside the stated tolerances
    bshift = sum(abs(aux.b[v] - pert.b_hat[v]) for v in g.nodes)
    assert 9 * bshift <= 14 * cert.beta
    cshift = sum(aux.c[a] - pert.c_hat[a] for a in range(g.m))
    assert 9 * cshift <= 7 * cert.gamma
    assert bshift > 0 or not res.cmap.deleted


def test_build_perturbed_rejects_oversized_residue():
    g = MultiGraph([1, 2], [(1, 2)])
    aux = _aux([1, 2], [(1, 2)], {1: -4, 2: 4}, [GAMMA])
    cmap = ContractionMap(g)
    cmap.delete(0)
    cert = compute_scaling(1, 1, 1)
    res = IPMResult(x=[cert.beta], s=[GAMMA], y={1: 0, 2: 0}, mu=1,
                    cmap=cmap, merge_edges=[], iterations=0, updates=0,
                    refreshes=0)
    with pytest.raises(InvariantError):
        build_perturbed(aux, cert, res)

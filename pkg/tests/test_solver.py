"""End-to-end solves checked against the reference oracle, including
infeasible, disconnected, negative-cost, and self-loop instances."""

import pytest

from latticeflow.errors import InvariantError
from latticeflow.graph_core import MultiGraph
from latticeflow.instance_pipeline import RawInstance
from latticeflow.reference_oracle import random_instance, ssp_solve, verify_certificate
from latticeflow.solver import SolveConfig, solve


def _check_optimal(inst, result):
    oracle = ssp_solve(inst)
    assert oracle.status == "optimal"
    assert result.status == "optimal"
    assert result.objective == oracle.objective
    report = verify_certificate(inst, result.flow, result.potentials)
    assert report.ok, report.failures


def test_triangle():
    inst = RawInstance(MultiGraph([1, 2, 3], [(1, 2), (2, 3), (1, 3)]),
                       {1: -2, 2: 0, 3: 2}, [2, 2, 1], [1, 1, 3])
    result = solve(inst)
    _check_optimal(inst, result)
    assert result.objective == 4
    assert result.flow == [2, 2, 0]


def test_negative_costs():
    inst = RawInstance(MultiGraph([1, 2], [(1, 2), (2, 1)]),
                       {1: 0, 2: 0}, [4, 5], [-3, 1])
    result = solve(inst)
    _check_optimal(inst, result)
    assert result.objective == -8
    assert result.flow == [4, 4]


def test_self_loop_negative_cost():
    inst = RawInstance(MultiGraph([1, 2], [(1, 2), (1, 1)]),
                       {1: -1, 2: 1}, [1, 3], [2, -5])
    result = solve(inst)
    _check_optimal(inst, result)
    assert result.flow == [1, 3]


def test_infeasible_cut():
    inst = RawInstance(MultiGraph([1, 2], [(1, 2)]), {1: -5, 2: 5}, [3], [1])
    result = solve(inst)
    assert result.status == "infeasible"
    assert result.flow is None and result.objective is None


def test_infeasible_wrong_direction():
    inst = RawInstance(MultiGraph([1, 2], [(2, 1)]), {1: -1, 2: 1}, [5], [0])
    assert solve(inst).status == "infeasible"


def test_disconnected_components_solve_independently():
    g = MultiGraph([1, 2, 3, 4], [(1, 2), (3, 4)])
    inst = RawInstance(g, {1: -1, 2: 1, 3: -2, 4: 2}, [1, 2], [1, 7])
    result = solve(inst)
    _check_optimal(inst, result)
    assert result.objective == 1 + 14
    assert len(result.components) == 2


def test_disconnected_unbalanced_component_is_infeasible():
    g = MultiGraph([1, 2, 3, 4], [(1, 2), (3, 4)])
    inst = RawInstance(g, {1: -1, 2: 2, 3: -1, 4: 0}, [2, 2], [1, 1])
    assert solve(inst).status == "infeasible"


def test_isolated_node():
    g = MultiGraph([1, 2, 3], [(1, 2)])
    inst = RawInstance(g, {1: -1, 2: 1, 3: 0}, [1], [1])
    result = solve(inst)
    _check_optimal(inst, result)
    assert result.potentials[3] == 0


def test_zero_demands_zero_costs():
    inst = RawInstance(MultiGraph([1, 2], [(1, 2), (2, 1)]),
                       {1: 0, 2: 0}, [2, 3], [0, 0])
    result = solve(inst)
    _check_optimal(inst, result)
    assert result.objective == 0


def test_parallel_arcs_pick_cheap_first():
    inst = RawInstance(MultiGraph([1, 2], [(1, 2), (1, 2)]),
                       {1: -3, 2: 3}, [2, 2], [5, 1])
    result = solve(inst)
    _check_optimal(inst, result)
    assert result.objective == 2 * 1 + 1 * 5


def test_strict_gamma_mode_agrees():
    inst = RawInstance(MultiGraph([1, 2, 3], [(1, 2), (2, 3), (1, 3)]),
                       {1: -2, 2: 0, 3: 2}, [2, 2, 1], [1, 1, 3])
    a = solve(inst, SolveConfig(strict_gamma=False))
    b = solve(inst, SolveConfig(strict_gamma=True))
    assert a.objective == b.objective == 4


def test_monitor_stays_under_limit():
    inst = random_instance(11, 4, 7, 6, 6, "feasible")
    result = solve(inst, SolveConfig(monitor_mode="strict"))
    for comp in result.components:
        if "limit" in comp:
            assert comp["max_abs"] <= comp["limit"]


def test_determinism_same_seed():
    inst = random_instance(5, 4, 6, 5, 5, "feasible")
    a = solve(inst, SolveConfig(seed=9))
    b = solve(inst, SolveConfig(seed=9))
    assert a.flow == b.flow and a.potentials == b.potentials
    assert a.components == b.components


def test_validation_errors_surface():
    inst = RawInstance(MultiGraph([1, 2], [(1, 2)]), {1: -1, 2: 2}, [1], [1])
    with pytest.raises(ValueError):
        solve(inst)


@pytest.mark.parametrize("seed", range(12))
def test_random_small_instances_match_oracle(seed):
    mode = "feasible" if seed % 2 else "random"
    n = 3 + seed % 3
    inst = random_instance(seed, n, n - 1 + seed % 4, 4, 4, mode)
    result = solve(inst)
    oracle = ssp_solve(inst)
    if oracle.status == "infeasible":
        assert result.status == "infeasible"
    else:
        _check_optimal(inst, result)

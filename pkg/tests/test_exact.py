import itertools

import numpy as np
import pytest

from scdopt.constructive import PIPELINES, PipelineConfig, run_pipeline
from scdopt.exact import (
    InfeasibleError,
    TransportationProblem,
    solve_exact,
    solve_scenario,
    solve_transportation,
)
from scdopt.instance import GenConfig, generate_instance
from scdopt.model import check_feasibility, coefficient_tensor

from helpers import make_instance, raw_params, tiny
from oracles import exact_bruteforce, transport_bruteforce


def test_transport_forced():
    res = solve_transportation(TransportationProblem([10], [10], [[3]]))
    assert res.feasible and res.cost == 30.0
    assert res.flows[0, 0] == 10.0


def test_transport_two_by_two():
    res = solve_transportation(TransportationProblem([5, 5], [4, 6], [[1, 2], [3, 1]]))
    assert res.cost == pytest.approx(11.0)
    np.testing.assert_allclose(res.flows, [[4, 1], [0, 5]])


def test_transport_infeasible():
    res = solve_transportation(TransportationProblem([2, 2], [3, 3], [[1, 1], [1, 1]]))
    assert not res.feasible


@pytest.mark.parametrize("seed", range(20))
def test_transport_matches_integer_enumeration(seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(1, 4), 3
    demand = rng.integers(0, 7, n)
    supply = rng.integers(0, 10, m)
    supply[0] += max(0, demand.sum() - supply.sum())
    cost = rng.integers(1, 30, (m, n))
    res = solve_transportation(TransportationProblem(supply, demand, cost))
    assert res.cost == pytest.approx(transport_bruteforce(supply, demand, cost.tolist()), abs=1e-6)
    np.testing.assert_allclose(res.flows.sum(axis=0), demand, atol=1e-9)
    assert (res.flows.sum(axis=1) <= supply + 1e-9).all()


@pytest.mark.parametrize("seed", range(5))
def test_exact_matches_independent_bruteforce(seed):
    inst = tiny(seed)
    res = solve_exact(inst)
    ref, ref_x = exact_bruteforce(**raw_params(inst))
    assert res.proven
    assert res.optimum == pytest.approx(ref, rel=1e-9)
    assert check_feasibility(inst, res.best).feasible


def test_scenario_no_failure_is_clean_assignment():
    inst = generate_instance(GenConfig(3, 4, seed=7))
    x = np.ones(3, bool)
    res = solve_scenario(inst, x, 0)
    assert not res.z.any()
    lp = solve_transportation(TransportationProblem(inst.capacity, inst.demand, inst.lam))
    assert res.cost == pytest.approx(lp.cost, rel=1e-12)


def test_scenario_inspection_branches():
    inst = generate_instance(GenConfig(2, 3, seed=3))
    x = np.ones(2, bool)
    s = 1  # only facility 0 failed
    res = solve_scenario(inst, x, s)
    branch = []
    for z0 in (False, True):
        z = np.zeros((2, 4), bool)
        z[0, s] = z0
        alpha = np.array([1 - inst.q_eff[0, s] + inst.r_eff[0, s] if z0 else 1.0, 1.0])
        coef = coefficient_tensor(inst, z)[:, :, s] / alpha[:, None]
        tp = solve_transportation(TransportationProblem(alpha * inst.capacity, inst.demand, coef))
        branch.append(tp.cost + (inst.inspection_cost[0] if z0 else 0.0))
    assert res.cost == pytest.approx(min(branch), rel=1e-12)
    assert bool(res.z[0]) == (branch[1] < branch[0])


def test_scenario_infeasible_without_capacity():
    inst = generate_instance(GenConfig(3, 4, seed=7))
    x = np.zeros(3, bool)
    x[np.argmin(inst.capacity)] = True
    assert not solve_scenario(inst, x, 0).feasible


def test_single_dominant_facility_selected():
    inst = make_instance(
        f=[100, 1_000_000, 1_000_000], kappa=[500, 200, 200], n=[10, 10, 10],
        theta=[0.9, 0.6, 0.6], q=[0.1, 0.3, 0.3], r=[0.01, 0.05, 0.05],
        b=[100, 150], lam=[[10, 10], [500, 500], [500, 500]], o=[[100, 100], [900, 900], [900, 900]],
    )
    res = solve_exact(inst)
    assert res.best.x.tolist() == [True, False, False]
    # enumeration printout agrees
    totals = {}
    for bits in itertools.product((0, 1), repeat=3):
        x = np.array(bits, bool)
        if inst.capacity[x].sum() < inst.total_demand:
            continue
        totals[bits] = inst.fixed_cost @ x + sum(inst.rho[s] * solve_scenario(inst, x, s).cost for s in range(8))
    assert min(totals, key=totals.get) == (1, 0, 0)


def test_recourse_is_scenario_separable():
    inst = generate_instance(GenConfig(3, 3, seed=21))
    res = solve_exact(inst)
    x = res.best.x
    expected = inst.fixed_cost @ x + sum(inst.rho[s] * solve_scenario(inst, x, s).cost for s in range(8))
    assert res.optimum == pytest.approx(expected, rel=1e-12)


def test_exact_dominates_pipelines():
    for seed in range(15):
        inst = generate_instance(GenConfig(3, 3, seed=seed))
        opt = solve_exact(inst).optimum
        for name in PIPELINES:
            assert run_pipeline(inst, PipelineConfig.from_name(name)).total >= opt * (1 - 1e-9)


def test_exact_small_is_fast():
    inst = generate_instance(GenConfig(2, 2, seed=1))
    assert solve_exact(inst).wall_time < 1.0


def test_exact_time_budget_returns_unproven():
    inst = generate_instance(GenConfig(6, 5, seed=1))
    res = solve_exact(inst, time_budget=0.0)
    assert not res.proven


def test_exact_cap():
    inst = generate_instance(GenConfig(13, 2, seed=1))
    with pytest.raises(ValueError):
        solve_exact(inst)


def test_exact_infeasible():
    inst = make_instance([10], [5], [1], [0.9], [0.2], [0.05], [10], [[1]], [[100]])
    with pytest.raises(InfeasibleError):
        solve_exact(inst)

"""Exact optimum by enumeration over facility selections and per-scenario inspections.

Given x, scenarios decouple. Within a scenario the inspection vector is enumerated and
each candidate leaves a transportation problem in *delivered* units: an inspected
facility delivers alpha = 1 - q + r units per unit produced, so its supply shrinks to
alpha * capacity and its per-delivered-unit cost is the unit coefficient divided by alpha.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .instance import ScdInstance
from .model import Solution, make_solution

DEFAULT_MAX_FACILITIES = 12


class InfeasibleError(RuntimeError):
    pass


@dataclass(frozen=True)
class TransportationProblem:
    supplies: np.ndarray
    demands: np.ndarray
    unit_costs: np.ndarray


@dataclass
class TransportResult:
    flows: np.ndarray
    cost: float
    feasible: bool


@dataclass
class ScenarioResult:
    z: np.ndarray  # [l] inspection decisions
    p: np.ndarray  # [l, c] produced units
    cost: float  # recourse cost of this scenario, inspection included
    feasible: bool
    evaluated_z: int


@dataclass
class ExactResult:
    best: Solution | None
    optimum: float
    enumerated_x: int
    enumerated_z: int
    wall_time: float
    proven: bool


def solve_transportation(tp: TransportationProblem, tol: float = 1e-9) -> TransportResult:
    flows, cost, status = kernels.transport_ssp(tp.supplies, tp.demands, tp.unit_costs, tol)
    return TransportResult(flows, cost, status == kernels.STATUS_OK)


def _scenario_subproblem(inst: ScdInstance, open_idx: np.ndarray, s: int) -> ScenarioResult:
    L, C = inst.num_facilities, inst.num_consumers
    q = inst.q_eff[open_idx, s]
    r = inst.r_eff[open_idx, s]
    lam = inst.lam[open_idx]
    o = inst.o[open_idx]
    g = inst.gamma[open_idx]
    kappa = inst.capacity[open_idx]
    n_cost = inst.inspection_cost[open_idx]
    # inspection is dominated where the facility produces no taint
    eligible = np.flatnonzero(q > 0.0)

    coef0 = lam * (1.0 - q)[:, None] + o * q[:, None]
    coef1 = lam * (1.0 - q)[:, None] + o * r[:, None] + g * (q - r)[:, None]
    alpha1 = 1.0 - q + r

    best_cost = np.inf
    best_z = None
    best_y = None
    best_alpha = None
    for mask in range(1 << len(eligible)):
        zloc = np.zeros(len(open_idx), dtype=bool)
        for bit, e in enumerate(eligible):
            if mask >> bit & 1:
                zloc[e] = True
        alpha = np.where(zloc, alpha1, 1.0)
        coef = np.where(zloc[:, None], coef1, coef0) / alpha[:, None]
        flows, cost, status = kernels.transport_ssp(alpha * kappa, inst.demand, coef)
        if status != kernels.STATUS_OK:
            continue
        cost += float(n_cost[zloc].sum())
        if cost < best_cost:
            best_cost, best_z, best_y, best_alpha = cost, zloc, flows, alpha

    z = np.zeros(L, dtype=bool)
    p = np.zeros((L, C))
    if best_z is None:
        return ScenarioResult(z, p, np.inf, False, 1 << len(eligible))
    z[open_idx] = best_z
    p[open_idx] = best_y / best_alpha[:, None]
    return ScenarioResult(z, p, best_cost, True, 1 << len(eligible))


def solve_scenario(inst: ScdInstance, x, s: int) -> ScenarioResult:
    """Cheapest inspection vector and routing for scenario ``s`` with facilities ``x`` open."""
    open_idx = np.flatnonzero(np.asarray(x, dtype=bool))
    return _scenario_subproblem(inst, open_idx, s)


def solve_exact(inst: ScdInstance, time_budget: float | None = None,
                max_facilities: int = DEFAULT_MAX_FACILITIES, allow_large: bool = False) -> ExactResult:
    """Global optimum over all selections with enough nominal capacity.

    Selections are visited in binary-counter order. With a ``time_budget`` the search
    stops early and the incumbent is returned with ``proven=False``.
    """
    L, S = inst.num_facilities, inst.num_scenarios
    if L > max_facilities and not allow_large:
        raise ValueError(f"{L} facilities exceeds the exact-solver cap of {max_facilities}")
    t0 = time.perf_counter()
    need = inst.total_demand
    failed_bits = (inst.failed * (1 << np.arange(L))[:, None]).sum(axis=0)

    best_total = np.inf
    best = None
    n_x = n_z = 0
    proven = True
    for xmask in range(1, 1 << L):
        if time_budget is not None and time.perf_counter() - t0 > time_budget:
            proven = False
            break
        x = np.array([(xmask >> l) & 1 for l in range(L)], dtype=bool)
        if inst.capacity[x].sum() < need - 1e-9:
            continue
        fixed = float(inst.fixed_cost[x].sum())
        if fixed >= best_total:
            continue
        n_x += 1
        open_idx = np.flatnonzero(x)
        # scenarios sharing the same failed-and-open set have identical subproblems
        keys = failed_bits & xmask
        cache: dict[int, ScenarioResult] = {}
        expected = 0.0
        ok = True
        results = []
        for s in range(S):
            key = int(keys[s])
            res = cache.get(key)
            if res is None:
                res = _scenario_subproblem(inst, open_idx, s)
                cache[key] = res
                n_z += res.evaluated_z
            if not res.feasible:
                ok = False
                break
            results.append(res)
            expected += inst.rho[s] * res.cost
        if not ok:
            continue
        total = fixed + expected
        if total < best_total:
            best_total = total
            best = (x, results)

    wall = time.perf_counter() - t0
    if best is None:
        if not proven:
            return ExactResult(None, np.inf, n_x, n_z, wall, False)
        raise InfeasibleError("no facility selection has enough capacity to meet total demand")
    x, results = best
    z = np.stack([r.z for r in results], axis=1)
    p = np.stack([r.p for r in results], axis=2)
    sol = make_solution(inst, x, z, p, {"algorithm": "exact", "proven": proven})
    return ExactResult(sol, sol.total, n_x, n_z, wall, proven)

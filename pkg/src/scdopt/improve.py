"""Improvement heuristics: facility-flip local search and per-scenario rectangle-pivot VNS."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .constructive import build_solution, delivery_ratio
from .instance import ScdInstance
from .model import Solution, coefficient_tensor, clean_shipping_costs, make_solution

VNS_METRICS = ("clean", "coeff")
PIVOT_BOUNDS = ("losing", "four")


@dataclass(frozen=True)
class RectangleMove:
    l1: int
    c1: int
    l2: int
    c2: int
    amount: float


@dataclass(frozen=True)
class VnsConfig:
    kmax: int = 50
    seed: int = 0
    metric: str = "clean"
    # "four" caps the pivot by all four corners, which freezes tree-shaped greedy flows
    pivot_bound: str = "losing"

    def __post_init__(self):
        if self.kmax < 1:
            raise ValueError("kmax must be >= 1")
        if self.metric not in VNS_METRICS:
            raise ValueError(f"metric must be one of {VNS_METRICS}")
        if self.pivot_bound not in PIVOT_BOUNDS:
            raise ValueError(f"pivot_bound must be one of {PIVOT_BOUNDS}")


def local_x(inst: ScdInstance, start: Solution, stage2, accounting: str = "delivered") -> Solution:
    """Flip one facility at a time, keeping any flip that lowers the total cost.

    ``stage2`` maps ``(inst, x)`` to an inspection plan. A flip is only tried if the new
    selection still has nominal capacity for total demand; the sweep restarts from
    facility 0 after every accepted flip.
    """
    need = inst.total_demand
    x = np.asarray(start.x, dtype=bool).copy()
    cur = start
    flips = 0
    improved = True
    while improved:
        improved = False
        for l in range(inst.num_facilities):
            cand_x = x.copy()
            cand_x[l] = not cand_x[l]
            if inst.nominal_capacity(cand_x) < need:
                continue
            cand = build_solution(inst, cand_x, stage2(inst, cand_x), dict(start.meta), accounting)
            if cand.total < cur.total:
                x, cur = cand_x, cand
                flips += 1
                improved = True
                break
    if cur is start:
        return start
    meta = dict(cur.meta, algorithm="local-x", flips=flips)
    return Solution(cur.x, cur.z, cur.p, cur.taint, cur.cost, meta)


def rectangle_move(p: np.ndarray, rng: kernels.SplitMix64,
                   pivot_bound: str = "losing") -> tuple[np.ndarray, RectangleMove]:
    """One marginal-preserving pivot on a facility x consumer matrix.

    The chosen cell and its opposite corner lose ``amount``; the two other corners
    gain it. ``amount`` is uniform on [0, bound], the bound being the smaller losing
    corner (``"losing"``) or the smallest of all four (``"four"``). An identity move
    (amount 0) is returned if 20 draws find no rectangle with a positive bound.
    """
    l1, c1, l2, c2, amt = kernels.draw_rectangle(p.tolist(), rng, 20, pivot_bound == "four")
    out = np.array(p, dtype=float)
    if amt > 0.0:
        out[l1, c1] -= amt
        out[l2, c2] -= amt
        out[l2, c1] += amt
        out[l1, c2] += amt
    return out, RectangleMove(l1, c1, l2, c2, amt)


def scenario_seed(seed: int, s: int) -> int:
    """Independent stream seed for scenario ``s``."""
    return kernels.SplitMix64((seed * 0x100000001B3 + s) & kernels._kernels_py.MASK64).next_u64()


def vns_transport(inst: ScdInstance, start: Solution, cfg: VnsConfig = VnsConfig()):
    """Rectangle-pivot descent on each scenario's routing, then full re-evaluation.

    Pivots act on delivered units (produced units times 1 - q + r for inspected
    facilities), so every consumer keeps receiving exactly what it did before and each
    facility keeps its production. Returns ``(solution, traces)`` where ``traces[s]``
    lists the scenario's acceptance-metric cost after every accepted move.
    """
    x = np.asarray(start.x, dtype=bool)
    open_idx = np.flatnonzero(x)
    alpha = delivery_ratio(inst, start.z)
    if cfg.metric == "clean":
        weights = (inst.lam[:, :, None] * (1.0 - inst.q_eff)[:, None, :])
    else:
        weights = coefficient_tensor(inst, start.z)
    p = start.p.copy()
    traces = []
    for s in range(inst.num_scenarios):
        a = alpha[open_idx, s][:, None]
        y = start.p[open_idx, :, s] * a
        w = weights[open_idx, :, s] / a
        y_new, trace = kernels.vns_scenario(y, w, cfg.kmax, scenario_seed(cfg.seed, s),
                                              cfg.pivot_bound == "four")
        traces.append(trace)
        if len(trace) > 1:
            p[open_idx, :, s] = y_new / a
    sol = make_solution(inst, x, start.z, p, dict(start.meta, algorithm="vns", kmax=cfg.kmax, vns_metric=cfg.metric))
    return sol, traces


def scenario_lp_bound(inst: ScdInstance, sol: Solution, s: int, metric: str = "clean") -> float:
    """Transportation LP optimum for scenario ``s`` with the solution's own marginals.

    Uses the delivered-unit weights ``vns_transport`` optimises, so the VNS result for
    that scenario can never fall below it.
    """
    from .exact import TransportationProblem, solve_transportation

    open_idx = np.flatnonzero(sol.x)
    a = delivery_ratio(inst, sol.z)[open_idx, s][:, None]
    y = sol.p[open_idx, :, s] * a
    if metric == "clean":
        w = inst.lam[open_idx] * (1.0 - inst.q_eff[open_idx, s])[:, None]
    else:
        w = coefficient_tensor(inst, sol.z)[open_idx, :, s]
    res = solve_transportation(TransportationProblem(y.sum(axis=1), y.sum(axis=0), w / a))
    return res.cost


__all__ = [
    "RectangleMove",
    "VnsConfig",
    "clean_shipping_costs",
    "local_x",
    "rectangle_move",
    "scenario_lp_bound",
    "vns_transport",
]

"""Solution representation and cost evaluation for the two-stage design model.

Arrays follow the instance layout: ``x[l]``, ``z[l, s]``, and flows ``p[l, c, s]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .instance import ScdInstance

FEAS_TOL = 1e-6


@dataclass(frozen=True)
class CostBreakdown:
    fixed: float
    transport: float
    taint_penalty: float
    discard: float
    inspection: float

    @property
    def total(self) -> float:
        return self.fixed + self.transport + self.taint_penalty + self.discard + self.inspection

    def as_dict(self) -> dict:
        return {
            "fixed": self.fixed,
            "transport": self.transport,
            "taint_penalty": self.taint_penalty,
            "discard": self.discard,
            "inspection": self.inspection,
            "total": self.total,
        }


@dataclass(frozen=True)
class TaintFlows:
    k: np.ndarray  # tainted units shipped
    d: np.ndarray  # tainted units discarded at inspection


@dataclass(frozen=True, eq=False)
class Solution:
    x: np.ndarray
    z: np.ndarray
    p: np.ndarray
    taint: TaintFlows
    cost: CostBreakdown
    meta: dict = field(default_factory=dict)

    @property
    def total(self) -> float:
        return self.cost.total


@dataclass
class FeasibilityReport:
    capacity_violation: np.ndarray  # [l, s]
    demand_residual: np.ndarray  # [c, s], positive means under-delivered
    linking_violations: list
    negative_flows: float
    tol: float

    @property
    def feasible(self) -> bool:
        return (
            float(self.capacity_violation.max(initial=0.0)) <= self.tol
            and float(np.abs(self.demand_residual).max(initial=0.0)) <= self.tol
            and not self.linking_violations
            and self.negative_flows <= self.tol
        )


def derive_taint_flows(p: np.ndarray, z: np.ndarray, inst: ScdInstance) -> TaintFlows:
    """Split produced flow into shipped-tainted (k) and discarded (d) units."""
    z = np.asarray(z, dtype=bool)
    q, r = inst.q_eff, inst.r_eff
    k_rate = np.where(z, r, q)
    d_rate = np.where(z, q - r, 0.0)
    return TaintFlows(k_rate[:, None, :] * p, d_rate[:, None, :] * p)


def _check_dims(inst: ScdInstance, x, z, p) -> None:
    L, C, S = inst.num_facilities, inst.num_consumers, inst.num_scenarios
    if np.shape(x) != (L,) or np.shape(z) != (L, S) or np.shape(p) != (L, C, S):
        raise ValueError(
            f"solution shapes x{np.shape(x)} z{np.shape(z)} p{np.shape(p)} "
            f"do not match instance (L={L}, C={C}, S={S})"
        )


def evaluate_objective(inst: ScdInstance, x, z, p, taint: TaintFlows) -> CostBreakdown:
    _check_dims(inst, x, z, p)
    x = np.asarray(x, dtype=bool)
    z = np.asarray(z, dtype=bool)
    rho = inst.rho
    clean = (1.0 - inst.q_eff)[:, None, :] * p
    return CostBreakdown(
        fixed=float(inst.fixed_cost @ x),
        transport=float(np.einsum("lc,lcs,s->", inst.lam, clean, rho)),
        taint_penalty=float(np.einsum("lc,lcs,s->", inst.o, taint.k, rho)),
        discard=float(np.einsum("lc,lcs,s->", inst.gamma, taint.d, rho)),
        inspection=float(np.einsum("l,ls,s->", inst.inspection_cost, z.astype(float), rho)),
    )


def make_solution(inst: ScdInstance, x, z, p, meta=None) -> Solution:
    """Derive taint flows and cost for (x, z, p) and wrap them in a Solution."""
    x = np.asarray(x, dtype=bool)
    z = np.asarray(z, dtype=bool)
    p = np.asarray(p, dtype=float)
    taint = derive_taint_flows(p, z, inst)
    return Solution(x, z, p, taint, evaluate_objective(inst, x, z, p, taint), dict(meta or {}))


def unit_cost_coefficient(l: int, c: int, s: int, zbar: bool, inst: ScdInstance) -> float:
    """Scenario cost of one produced unit routed l -> c, given the inspection decision.

    The discard term is charged only under inspection, which keeps this form identical
    to the five-term objective once k and d are substituted.
    """
    lam = float(inst.lam[l, c])
    q = float(inst.q_eff[l, s])
    r = float(inst.r_eff[l, s])
    if zbar:
        return lam * (1.0 - q) + float(inst.o[l, c]) * r + float(inst.gamma[l, c]) * (q - r)
    return lam * (1.0 - q) + float(inst.o[l, c]) * q


def coefficient_tensor(inst: ScdInstance, z) -> np.ndarray:
    """Vectorised ``unit_cost_coefficient`` over all (l, c, s)."""
    z = np.asarray(z, dtype=bool)
    q, r = inst.q_eff[:, None, :], inst.r_eff[:, None, :]
    zz = z[:, None, :]
    lam, o, g = inst.lam[:, :, None], inst.o[:, :, None], inst.gamma[:, :, None]
    return lam * (1.0 - q) + np.where(zz, o * r + g * (q - r), o * q)


def check_feasibility(inst: ScdInstance, sol: Solution, tol: float = FEAS_TOL) -> FeasibilityReport:
    x = np.asarray(sol.x, dtype=bool)
    p = sol.p
    cap = np.maximum(0.0, p.sum(axis=1) - (inst.capacity * x)[:, None])
    delivered = ((1.0 - inst.q_eff)[:, None, :] * p + sol.taint.k).sum(axis=0)
    resid = inst.demand[:, None] - delivered
    links = [(int(l), int(s)) for l, s in zip(*np.nonzero(sol.z & ~x[:, None]))]
    neg = float(max(0.0, -p.min(initial=0.0)))
    return FeasibilityReport(cap, resid, links, neg, tol)


def percent_gap(value: float, reference: float) -> float:
    """Relative gap of ``value`` over ``reference``; negative when value is better."""
    if not reference > 0:
        raise ValueError(f"reference must be positive, got {reference}")
    return (value - reference) / reference


def clean_shipping_costs(inst: ScdInstance, p: np.ndarray) -> np.ndarray:
    """Per-scenario clean-shipping cost sum_{l,c} lam_lc (1 - q_ls) p_lcs."""
    return np.einsum("lc,ls,lcs->s", inst.lam, 1.0 - inst.q_eff, p)


# -- persistence ---------------------------------------------------------------

def solution_to_dict(sol: Solution) -> dict:
    l_idx, c_idx, s_idx = np.nonzero(sol.p)
    return {
        "x": [int(v) for v in sol.x],
        "z": sol.z.astype(int).tolist(),
        "p": [
            {"l": int(l), "c": int(c), "s": int(s), "value": float(sol.p[l, c, s])}
            for l, c, s in zip(l_idx, c_idx, s_idx)
        ],
        "cost": sol.cost.as_dict(),
        "meta": sol.meta,
    }


def solution_from_dict(inst: ScdInstance, data: dict) -> Solution:
    L, C, S = inst.num_facilities, inst.num_consumers, inst.num_scenarios
    p = np.zeros((L, C, S))
    for t in data["p"]:
        p[t["l"], t["c"], t["s"]] = t["value"]
    return make_solution(inst, np.array(data["x"], dtype=bool), np.array(data["z"], dtype=bool), p,
                         data.get("meta"))


def save_solution(sol: Solution, path) -> None:
    Path(path).write_text(json.dumps(solution_to_dict(sol), indent=1, default=_json_default) + "\n")


def load_solution(inst: ScdInstance, path) -> Solution:
    return solution_from_dict(inst, json.loads(Path(path).read_text()))


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")

"""Three-stage constructive heuristics: facility selection, inspection policy, greedy routing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .instance import ScdInstance
from .model import Solution, make_solution

STAGE1 = ("bgh", "sgh", "cbgh")
STAGE2 = ("fsih", "gih", "rgih")
PIPELINES = tuple(f"{a}-{b}" for a in STAGE1 for b in STAGE2)


@dataclass(frozen=True)
class PipelineConfig:
    stage1: str = "sgh"
    stage2: str = "fsih"
    delta: float = 0.90
    chi: float = 0.5
    seed: int = 0
    accounting: str = "delivered"

    def __post_init__(self):
        if self.stage1 not in STAGE1:
            raise ValueError(f"unknown stage-1 rule {self.stage1!r}")
        if self.stage2 not in STAGE2:
            raise ValueError(f"unknown stage-2 rule {self.stage2!r}")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError("delta must lie in (0, 1]")

    @classmethod
    def from_name(cls, name: str, **kw) -> "PipelineConfig":
        try:
            a, b = name.lower().replace("&", "-").split("-")
        except ValueError:
            raise ValueError(f"pipeline name must look like 'sgh-fsih', got {name!r}") from None
        return cls(stage1=a, stage2=b, **kw)

    @property
    def name(self) -> str:
        return f"{self.stage1}-{self.stage2}"


# -- stage 1 -------------------------------------------------------------------

def expected_capacity(capacity, taint_rate, chi: float = 0.5):
    """Mean available capacity when a facility runs clean with probability ``chi``."""
    return chi * capacity + (1.0 - chi) * (1.0 - taint_rate) * capacity


def select_bgh(inst: ScdInstance) -> np.ndarray:
    return np.ones(inst.num_facilities, dtype=bool)


def _fill_in_order(inst: ScdInstance, order, exp_cap) -> tuple[np.ndarray, bool]:
    x = np.zeros(inst.num_facilities, dtype=bool)
    need = inst.total_demand
    acc = 0.0
    for l in order:
        x[l] = True
        acc += exp_cap[l]
        if acc >= need:
            return x, False
    return x, True


def sgh_scores(inst: ScdInstance) -> np.ndarray:
    return inst.fixed_cost + inst.lam.mean(axis=1) + inst.o.mean(axis=1) + inst.gamma.mean(axis=1)


def select_sgh(inst: ScdInstance, chi: float = 0.5) -> tuple[np.ndarray, bool]:
    """Cheapest-score-first selection until expected capacity covers demand.

    Returns ``(x, capacity_short)``.
    """
    order = np.argsort(sgh_scores(inst), kind="stable")
    return _fill_in_order(inst, order, expected_capacity(inst.capacity, inst.taint_rate, chi))


def select_cbgh(inst: ScdInstance, chi: float = 0.5) -> tuple[np.ndarray, bool]:
    """Largest-expected-capacity-first selection until demand is covered."""
    exp_cap = expected_capacity(inst.capacity, inst.taint_rate, chi)
    order = np.lexsort((np.arange(inst.num_facilities), -exp_cap))
    return _fill_in_order(inst, order, exp_cap)


# -- stage 2 -------------------------------------------------------------------

def _eligible(inst: ScdInstance, x) -> np.ndarray:
    return np.asarray(x, dtype=bool)[:, None] & (inst.q_eff > 0.0)


def inspect_fsih(inst: ScdInstance, x) -> np.ndarray:
    """Inspect every open facility in every scenario where it has failed."""
    return _eligible(inst, x) & inst.failed


def inspect_gih(inst: ScdInstance, x, delta: float = 0.90) -> np.ndarray:
    x = np.asarray(x, dtype=bool)
    L, S = inst.num_facilities, inst.num_scenarios
    z = np.zeros((L, S), dtype=bool)
    limit = (1.0 - delta) * inst.total_demand
    kx = inst.capacity * x
    order = np.lexsort((np.arange(L), -(inst.taint_rate - inst.residual_rate)))
    elig = _eligible(inst, x)
    for s in range(S):
        q, r = inst.q_eff[:, s], inst.r_eff[:, s]
        lhs = float((q * kx).sum())
        for l in order:
            if lhs <= limit:
                break
            if elig[l, s]:
                z[l, s] = True
                lhs += (r[l] - q[l]) * kx[l]
    return z


def rgih_savings(inst: ScdInstance) -> np.ndarray:
    """Estimated saving [l, s] from inspecting facility l in scenario s."""
    o_bar = inst.o.mean(axis=1)[:, None]
    g_bar = inst.gamma.mean(axis=1)[:, None]
    q, r = inst.q_eff, inst.r_eff
    per_unit = o_bar * q - (o_bar * r + g_bar * (q - r))
    return inst.capacity[:, None] * per_unit - inst.inspection_cost[:, None]


def inspect_rgih(inst: ScdInstance, x, rng: np.random.Generator) -> np.ndarray:
    """Inspect where the estimated saving beats a random fraction of the inspection cost."""
    tau = rng.uniform(0.0, 1.0, size=(inst.num_facilities, inst.num_scenarios))
    threshold = tau * inst.inspection_cost[:, None]
    return _eligible(inst, x) & (rgih_savings(inst) > threshold)


# -- stage 3 -------------------------------------------------------------------

ACCOUNTING = ("delivered", "produced")


def delivery_ratio(inst: ScdInstance, z) -> np.ndarray:
    """Units delivered per unit produced, [l, s]: 1 - q + r under inspection, else 1."""
    return np.where(np.asarray(z, dtype=bool), 1.0 - inst.q_eff + inst.r_eff, 1.0)


def greedy_assignment(lam: np.ndarray, capacity: np.ndarray, demand: np.ndarray, alpha=None):
    """Route consumers in index order to their cheapest facility with capacity left.

    Single-pattern convenience wrapper around the allocation kernel. Returns
    ``(p[l, c], unserved[c])``.
    """
    if alpha is None:
        alpha = np.ones(lam.shape[0])
    p, u = kernels.greedy_alloc(lam, capacity, np.asarray(alpha, dtype=float)[:, None], demand)
    return p[:, :, 0], u[:, 0]


def allocate_greedy(inst: ScdInstance, x, z=None, accounting: str = "delivered"):
    """Produced flows p[l, c, s] and unserved demand u[c, s].

    With ``accounting="delivered"`` each consumer's residual demand drops by the units
    that actually arrive, so an inspected facility must produce 1 / (1 - q + r) units per
    unit of demand. ``"produced"`` decrements by produced units regardless of inspection.
    """
    if accounting not in ACCOUNTING:
        raise ValueError(f"accounting must be one of {ACCOUNTING}")
    x = np.asarray(x, dtype=bool)
    L, S = inst.num_facilities, inst.num_scenarios
    cap = inst.capacity * x
    if accounting == "produced" or z is None:
        p, u = kernels.greedy_alloc(inst.lam, cap, np.ones((L, 1)), inst.demand)
        return np.repeat(p, S, axis=2), np.repeat(u, S, axis=1)
    alpha = delivery_ratio(inst, np.asarray(z, dtype=bool) & x[:, None])
    # route each distinct delivery pattern once
    patterns, inverse = np.unique(alpha.T, axis=0, return_inverse=True)
    p, u = kernels.greedy_alloc(inst.lam, cap, np.ascontiguousarray(patterns.T), inst.demand)
    inverse = np.asarray(inverse).reshape(-1)
    return p[:, :, inverse], u[:, inverse]


def repair_inspections(inst: ScdInstance, x, z) -> np.ndarray:
    """Drop inspections where they leave too little deliverable capacity.

    Per scenario, while the open facilities cannot deliver total demand, the inspection
    with the smallest taint reduction q - r is removed (lowest index on ties).
    """
    x = np.asarray(x, dtype=bool)
    z = np.asarray(z, dtype=bool) & x[:, None]
    need = inst.total_demand
    kx = inst.capacity * x
    alpha = delivery_ratio(inst, z)
    short = np.flatnonzero((alpha * kx[:, None]).sum(axis=0) < need - 1e-9)
    if short.size == 0:
        return z
    z = z.copy()
    order = np.lexsort((np.arange(inst.num_facilities), inst.taint_rate - inst.residual_rate))
    for s in short:
        deliverable = float((alpha[:, s] * kx).sum())
        for l in order:
            if deliverable >= need - 1e-9:
                break
            if z[l, s]:
                z[l, s] = False
                deliverable += (1.0 - alpha[l, s]) * kx[l]
    return z


def build_solution(inst: ScdInstance, x, z, meta=None, accounting: str = "delivered") -> Solution:
    """Greedy-route (x, z) and evaluate it.

    Under delivered accounting, inspections that would make a scenario unservable are
    dropped first, so the result meets demand exactly whenever x has nominal capacity.
    """
    meta = dict(meta or {})
    if accounting == "delivered":
        z = repair_inspections(inst, x, z)
    p, unserved = allocate_greedy(inst, x, z, accounting)
    if (unserved > 1e-9).any():
        meta["unserved"] = float(unserved.max())
    meta.setdefault("accounting", accounting)
    return make_solution(inst, x, z, p, meta)


def stage2_rule(cfg: PipelineConfig):
    """Callable ``(inst, x) -> z`` for the configured inspection policy."""
    if cfg.stage2 == "fsih":
        return inspect_fsih
    if cfg.stage2 == "gih":
        return lambda inst, x: inspect_gih(inst, x, cfg.delta)
    # re-seeded per call so a given x always maps to the same plan
    return lambda inst, x: inspect_rgih(inst, x, np.random.default_rng(cfg.seed))


def run_pipeline(inst: ScdInstance, cfg: PipelineConfig) -> Solution:
    """Stage 1, then stage 2, then greedy routing and evaluation."""
    short = False
    if cfg.stage1 == "bgh":
        x = select_bgh(inst)
    elif cfg.stage1 == "sgh":
        x, short = select_sgh(inst, cfg.chi)
    else:
        x, short = select_cbgh(inst, cfg.chi)
    z = stage2_rule(cfg)(inst, x)
    meta = {"algorithm": cfg.name, "capacity_short": bool(short)}
    if inst.nominal_capacity(x) < inst.total_demand:
        meta["nominal_capacity_short"] = True
    return build_solution(inst, x, z, meta, cfg.accounting)


def run_all_pipelines(inst: ScdInstance, seed: int = 0, delta: float = 0.90) -> dict[str, Solution]:
    return {
        name: run_pipeline(inst, PipelineConfig.from_name(name, seed=seed, delta=delta))
        for name in PIPELINES
    }

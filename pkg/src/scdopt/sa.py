"""Simulated annealing over facility selection and inspection plans."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .constructive import build_solution, inspect_fsih
from .instance import ScdInstance
from .model import Solution

MOVES = ("swap", "add", "remove", "2swap")
ACCEPTANCE = ("metropolis", "descent")


@dataclass(frozen=True)
class SaConfig:
    T0: float = 8000.0
    theta: float = 0.75
    T_final: float = 0.01
    max_iter: int | None = None  # None: 100 for up to 5 facilities, else 350
    seed: int = 0
    acceptance: str = "metropolis"
    accounting: str = "delivered"

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError("theta must lie in (0, 1)")
        if self.T_final <= 0.0:
            raise ValueError("T_final must be positive")
        if self.T0 <= self.T_final:
            raise ValueError("T0 must exceed T_final")
        if self.acceptance not in ACCEPTANCE:
            raise ValueError(f"acceptance must be one of {ACCEPTANCE}")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")

    def iteration_cap(self, num_facilities: int) -> int:
        if self.max_iter is not None:
            return self.max_iter
        return 100 if num_facilities <= 5 else 350


@dataclass
class SaTrace:
    moves: list[str] = field(default_factory=list)
    candidate_costs: list[float] = field(default_factory=list)
    accepted: list[bool] = field(default_factory=list)
    temperatures: list[float] = field(default_factory=list)
    best_costs: list[float] = field(default_factory=list)

    def __len__(self):
        return len(self.moves)

    def record(self, move, cost, accepted, temperature, best):
        self.moves.append(move)
        self.candidate_costs.append(float(cost))
        self.accepted.append(bool(accepted))
        self.temperatures.append(float(temperature))
        self.best_costs.append(float(best))


def cooling_steps(T0: float, theta: float, T_final: float) -> int:
    """Number of geometric cooling steps until the temperature reaches ``T_final``."""
    k = 0
    while T0 * theta**k > T_final:
        k += 1
    return k


def estimate_initial_temperature(cost_samples, varpi: float = 0.95) -> float:
    """Starting temperature from the spread of successive cost differences.

    Scales the sample standard deviation of the differences by -3 / ln(varpi). Returns 0
    (with a warning) when the samples carry no spread.
    """
    samples = np.asarray(cost_samples, dtype=float)
    if samples.size < 2:
        raise ValueError("need at least two cost samples")
    if not 0.0 < varpi < 1.0:
        raise ValueError("varpi must lie in (0, 1)")
    diffs = np.diff(samples)
    sigma = float(np.std(diffs, ddof=1)) if diffs.size > 1 else 0.0
    if sigma == 0.0:
        warnings.warn("cost samples show no spread; use the default T0", RuntimeWarning, stacklevel=2)
        return 0.0
    return -3.0 / math.log(varpi) * sigma


def sample_costs(inst: ScdInstance, start: Solution, n: int = 20, seed: int = 0,
                 accounting: str = "delivered") -> list[float]:
    """Costs along a random walk of proposals, for ``estimate_initial_temperature``."""
    rng = np.random.default_rng(seed)
    x, z = start.x, start.z
    out = [start.total]
    for _ in range(n - 1):
        x, z, _ = propose_move(inst, x, z, rng)
        sol = build_solution(inst, x, z, accounting=accounting)
        z = sol.z
        out.append(sol.total)
    return out


def _move_x(x: np.ndarray, move: str, rng: np.random.Generator) -> np.ndarray | None:
    on = np.flatnonzero(x)
    off = np.flatnonzero(~x)
    out = x.copy()
    if move == "swap":
        if on.size < 1 or off.size < 1:
            return None
        out[rng.choice(on)] = False
        out[rng.choice(off)] = True
    elif move == "add":
        if off.size < 1:
            return None
        out[rng.choice(off)] = True
    elif move == "remove":
        if on.size < 2:
            return None
        out[rng.choice(on)] = False
    else:
        if on.size < 2 or off.size < 2:
            return None
        out[rng.choice(on, 2, replace=False)] = False
        out[rng.choice(off, 2, replace=False)] = True
    return out


def _flip_one(inst: ScdInstance, x: np.ndarray, z: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    elig = np.argwhere(x[:, None] & (inst.q_eff > 0.0))
    if len(elig):
        l, s = elig[rng.integers(len(elig))]
        z = z.copy()
        z[l, s] = not z[l, s]
    return z


def propose_move(inst: ScdInstance, x, z, rng: np.random.Generator, max_draws: int = 1000):
    """Neighbour of (x, z): one of four facility moves, then an FSIH plan with one flip.

    The move type is drawn uniformly; draws whose move is not possible for the current
    x, or that would leave less nominal capacity than total demand, are redrawn. If no
    facility move turns up, x stays as is and only z changes. Returns ``(x, z, move)``.
    """
    x = np.asarray(x, dtype=bool)
    need = inst.total_demand
    new_x, move = None, "none"
    for _ in range(max_draws):
        u = rng.random()
        kind = MOVES[min(int(u * 4), 3)]
        cand = _move_x(x, kind, rng)
        if cand is not None and inst.nominal_capacity(cand) >= need:
            new_x, move = cand, kind
            break
    if new_x is None:
        new_x = x.copy()
    new_z = _flip_one(inst, new_x, inspect_fsih(inst, new_x), rng)
    return new_x, new_z, move


def accept_probability(delta: float, temperature: float) -> float:
    if delta <= 0.0:
        return 1.0
    return math.exp(-delta / temperature)


def sa_solve(inst: ScdInstance, start: Solution, cfg: SaConfig = SaConfig()):
    """Anneal from ``start``; returns the best solution seen and the per-iteration trace.

    Temperature k is T0 * theta**k, applied once per iteration. The run stops once the
    temperature is at or below ``T_final`` or after the iteration cap.
    """
    if inst.nominal_capacity(start.x) < inst.total_demand:
        raise ValueError("start selection lacks nominal capacity for total demand")
    rng = np.random.default_rng(cfg.seed)
    cap = cfg.iteration_cap(inst.num_facilities)
    cur = best = start
    trace = SaTrace()
    k = 0
    T = cfg.T0
    while k < cap and T > cfg.T_final:
        x, z, move = propose_move(inst, cur.x, cur.z, rng)
        cand = build_solution(inst, x, z, {"algorithm": "sa"}, cfg.accounting)
        delta = cand.total - cur.total
        if cfg.acceptance == "descent":
            ok = delta <= 0.0
        else:
            ok = delta <= 0.0 or rng.random() < accept_probability(delta, T)
        if ok:
            cur = cand
            if cur.total < best.total:
                best = cur
        trace.record(move, cand.total, ok, T, best.total)
        k += 1
        T = cfg.T0 * cfg.theta**k
    meta = dict(best.meta, algorithm="sa", seed=cfg.seed, iterations=k)
    return Solution(best.x, best.z, best.p, best.taint, best.cost, meta), trace


def split_seeds(master: int, n: int, *keys: int) -> list[int]:
    """``n`` independent 63-bit seeds derived from ``master`` and extra integer keys."""
    ss = np.random.SeedSequence([int(master), *map(int, keys)])
    return [int(s.generate_state(2, dtype=np.uint64)[0] >> np.uint64(1)) for s in ss.spawn(n)]

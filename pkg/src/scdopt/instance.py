"""Problem instances: parameter types, seeded generation, scenario enumeration, JSON I/O."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

GENERATOR_VERSION = "1"
MAX_FACILITIES_DEFAULT = 16


class InstanceError(ValueError):
    """Raised for instances that are malformed or violate a parameter range."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(message)


@dataclass(frozen=True)
class FacilityParams:
    id: int
    fixed_cost: int
    capacity: int
    inspection_cost: int
    reliability: float
    taint_rate: float
    residual_taint_rate: float


@dataclass(frozen=True)
class ConsumerParams:
    id: int
    demand: int


@dataclass(frozen=True, eq=False)
class CostMatrices:
    """Per-unit costs indexed [facility, consumer]."""

    ship_clean: np.ndarray
    ship_tainted: np.ndarray
    discard: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, CostMatrices):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f.name), getattr(other, f.name)) for f in fields(self)
        )


@dataclass(frozen=True)
class Scenario:
    failed_set: frozenset
    probability: float
    effective_q: tuple
    effective_r: tuple


@dataclass
class GenConfig:
    num_facilities: int
    num_consumers: int
    seed: int = 0
    fixed_cost: tuple = (1_000_000, 2_000_000)
    demand: tuple = (100, 300)
    inspection_cost: tuple = (50_000, 100_000)
    ship_clean: tuple = (100, 1000)
    ship_tainted: tuple = (10_000, 25_000)
    reliability: tuple = (0.50, 0.95)
    taint_rate: tuple = (0.10, 0.30)
    residual_taint_rate: tuple = (0.01, 0.09)
    discard_fraction: float = 0.25
    capacity_slack: float = 1.3
    capacity_weight: tuple = (1.0, 2.0)
    allow_large: bool = False

    def validate(self) -> None:
        if self.num_facilities < 1:
            raise InstanceError("num_facilities", "num_facilities must be >= 1")
        if self.num_consumers < 1:
            raise InstanceError("num_consumers", "num_consumers must be >= 1")
        if self.num_facilities > MAX_FACILITIES_DEFAULT and not self.allow_large:
            raise InstanceError(
                "num_facilities",
                f"{self.num_facilities} facilities would enumerate 2^{self.num_facilities} = "
                f"{2 ** self.num_facilities} scenarios; pass allow_large to override",
            )
        if not 0 < self.capacity_weight[0] <= self.capacity_weight[1]:
            raise InstanceError("capacity_weight", "capacity weights must be positive and ordered")
        for name in ("fixed_cost", "demand", "inspection_cost", "ship_clean", "ship_tainted",
                     "reliability", "taint_rate", "residual_taint_rate"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise InstanceError(name, f"{name} bounds reversed: {lo} > {hi}")
        if self.residual_taint_rate[1] >= self.taint_rate[0]:
            raise InstanceError("residual_taint_rate", "residual rate range must lie below taint rate range")

    def bounds(self) -> dict:
        d = asdict(self)
        for k in ("num_facilities", "num_consumers", "seed", "allow_large"):
            d.pop(k)
        return d


@dataclass(frozen=True, eq=False)
class ScdInstance:
    facilities: tuple
    consumers: tuple
    costs: CostMatrices
    scenarios: tuple
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        fac = self.facilities
        setf = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        setf("fixed_cost", np.array([f.fixed_cost for f in fac], dtype=float))
        setf("capacity", np.array([f.capacity for f in fac], dtype=float))
        setf("inspection_cost", np.array([f.inspection_cost for f in fac], dtype=float))
        setf("reliability", np.array([f.reliability for f in fac], dtype=float))
        setf("taint_rate", np.array([f.taint_rate for f in fac], dtype=float))
        setf("residual_rate", np.array([f.residual_taint_rate for f in fac], dtype=float))
        setf("demand", np.array([c.demand for c in self.consumers], dtype=float))
        setf("lam", np.asarray(self.costs.ship_clean, dtype=float))
        setf("o", np.asarray(self.costs.ship_tainted, dtype=float))
        setf("gamma", np.asarray(self.costs.discard, dtype=float))
        # scenario-indexed views: rho[s], q_eff[l, s], r_eff[l, s], failed[l, s]
        setf("rho", np.array([s.probability for s in self.scenarios], dtype=float))
        setf("q_eff", np.array([s.effective_q for s in self.scenarios], dtype=float).T.copy())
        setf("r_eff", np.array([s.effective_r for s in self.scenarios], dtype=float).T.copy())
        failed = np.zeros((len(fac), len(self.scenarios)), dtype=bool)
        for j, s in enumerate(self.scenarios):
            failed[list(s.failed_set), j] = True
        setf("failed", failed)

    @property
    def num_facilities(self) -> int:
        return len(self.facilities)

    @property
    def num_consumers(self) -> int:
        return len(self.consumers)

    @property
    def num_scenarios(self) -> int:
        return len(self.scenarios)

    @property
    def total_demand(self) -> float:
        return float(self.demand.sum())

    def nominal_capacity(self, x) -> float:
        return float(self.capacity[np.asarray(x, dtype=bool)].sum())

    def __eq__(self, other):
        if not isinstance(other, ScdInstance):
            return NotImplemented
        return (
            self.facilities == other.facilities
            and self.consumers == other.consumers
            and self.costs == other.costs
            and self.scenarios == other.scenarios
        )


def enumerate_scenarios(facilities) -> list[Scenario]:
    """All 2^|L| failure subsets in binary-counter order (facility 0 is the low bit)."""
    n = len(facilities)
    if n == 0:
        raise InstanceError("facilities", "cannot enumerate scenarios for an empty facility list")
    theta = [f.reliability for f in facilities]
    q = [f.taint_rate for f in facilities]
    r = [f.residual_taint_rate for f in facilities]
    out = []
    for mask in range(1 << n):
        prob = 1.0
        eq, er = [], []
        failed = []
        for l in range(n):
            if mask >> l & 1:
                prob *= 1.0 - theta[l]
                eq.append(q[l])
                er.append(r[l])
                failed.append(l)
            else:
                prob *= theta[l]
                eq.append(0.0)
                er.append(0.0)
        out.append(Scenario(frozenset(failed), prob, tuple(eq), tuple(er)))
    return out


def _largest_remainder(weights: np.ndarray, total: int) -> np.ndarray:
    raw = weights / weights.sum() * total
    base = np.floor(raw).astype(np.int64)
    short = total - int(base.sum())
    # stable order: larger remainder first, lower index on ties
    order = np.lexsort((np.arange(len(raw)), -(raw - base)))
    base[order[:short]] += 1
    return base


def _distinct_integers(rng: np.random.Generator, lo: int, hi: int, size: int) -> np.ndarray:
    span = hi - lo + 1
    if span >= size:
        return lo + rng.choice(span, size=size, replace=False)
    return rng.integers(lo, hi + 1, size=size)


def generate_instance(cfg: GenConfig) -> ScdInstance:
    """Draw a random instance; a pure function of ``cfg``."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    L, C = cfg.num_facilities, cfg.num_consumers

    demand = rng.integers(cfg.demand[0], cfg.demand[1] + 1, size=C)
    reliability = rng.uniform(*cfg.reliability, size=L)
    q = rng.uniform(*cfg.taint_rate, size=L)
    r = rng.uniform(*cfg.residual_taint_rate, size=L)

    target = int(round(cfg.capacity_slack * int(demand.sum())))
    capacity = _largest_remainder(rng.uniform(*cfg.capacity_weight, size=L), target)
    if not (capacity > 0).all():
        raise InstanceError("capacity", "capacity split produced an empty facility; raise the total or shrink the weight spread")

    # highest capacity gets the highest fixed cost; largest q - r gets the highest inspection cost
    fixed = np.sort(_distinct_integers(rng, *cfg.fixed_cost, L))
    fixed_cost = np.empty(L, dtype=np.int64)
    fixed_cost[np.argsort(capacity, kind="stable")] = fixed
    insp = np.sort(_distinct_integers(rng, *cfg.inspection_cost, L))
    inspection_cost = np.empty(L, dtype=np.int64)
    inspection_cost[np.argsort(q - r, kind="stable")] = insp

    lam = rng.integers(cfg.ship_clean[0], cfg.ship_clean[1] + 1, size=(L, C))
    o = rng.integers(cfg.ship_tainted[0], cfg.ship_tainted[1] + 1, size=(L, C))
    gamma = cfg.discard_fraction * lam.astype(float)

    facilities = tuple(
        FacilityParams(
            id=l,
            fixed_cost=int(fixed_cost[l]),
            capacity=int(capacity[l]),
            inspection_cost=int(inspection_cost[l]),
            reliability=float(reliability[l]),
            taint_rate=float(q[l]),
            residual_taint_rate=float(r[l]),
        )
        for l in range(L)
    )
    consumers = tuple(ConsumerParams(id=c, demand=int(demand[c])) for c in range(C))
    costs = CostMatrices(lam.astype(np.int64), o.astype(np.int64), gamma)
    meta = {"seed": int(cfg.seed), "generator_version": GENERATOR_VERSION, "bounds": _jsonable(cfg.bounds())}
    return ScdInstance(facilities, consumers, costs, tuple(enumerate_scenarios(facilities)), meta)


def build_instance(facilities, consumers, costs: CostMatrices, meta=None) -> ScdInstance:
    """Assemble an instance from parts, deriving the scenario set."""
    facilities = tuple(facilities)
    return ScdInstance(facilities, tuple(consumers), costs, tuple(enumerate_scenarios(facilities)),
                       dict(meta or {}))


def validate_instance(inst: ScdInstance, bounds: dict | None = None) -> None:
    """Check every parameter range and structural invariant; raise InstanceError on the first breach."""
    b = GenConfig(1, 1).bounds()
    if bounds:
        b.update({k: tuple(v) if isinstance(v, list) else v for k, v in bounds.items()})
    L, C = inst.num_facilities, inst.num_consumers

    def rng_check(name, value, lo, hi):
        if not lo <= value <= hi:
            raise InstanceError(name, f"{name} = {value} out of [{lo}, {hi}]")

    for f in inst.facilities:
        p = f"facilities[{f.id}]"
        rng_check(f"{p}.fixed_cost", f.fixed_cost, *b["fixed_cost"])
        rng_check(f"{p}.inspection_cost", f.inspection_cost, *b["inspection_cost"])
        rng_check(f"{p}.reliability", f.reliability, *b["reliability"])
        rng_check(f"{p}.taint_rate", f.taint_rate, *b["taint_rate"])
        rng_check(f"{p}.residual_taint_rate", f.residual_taint_rate, *b["residual_taint_rate"])
        if f.capacity <= 0:
            raise InstanceError(f"{p}.capacity", f"{p}.capacity must be positive")
        if not f.residual_taint_rate < f.taint_rate:
            raise InstanceError(f"{p}.residual_taint_rate", f"{p}: residual rate must be below taint rate")
    for c in inst.consumers:
        rng_check(f"consumers[{c.id}].demand", c.demand, *b["demand"])
    for name, arr in (("ship_clean", inst.lam), ("ship_tainted", inst.o), ("discard", inst.gamma)):
        if arr.shape != (L, C):
            raise InstanceError(f"costs.{name}", f"costs.{name} has shape {arr.shape}, expected {(L, C)}")
    for name, arr in (("ship_clean", inst.lam), ("ship_tainted", inst.o)):
        lo, hi = b[name]
        if arr.min() < lo or arr.max() > hi:
            raise InstanceError(f"costs.{name}", f"costs.{name} entries out of [{lo}, {hi}]")
    if not np.array_equal(inst.gamma, b["discard_fraction"] * inst.lam):
        raise InstanceError("costs.discard", "costs.discard must equal discard_fraction * ship_clean")
    if abs(inst.rho.sum() - 1.0) > 1e-12:
        raise InstanceError("scenarios", f"scenario probabilities sum to {inst.rho.sum()!r}")


# -- persistence ---------------------------------------------------------------

def _jsonable(d: dict) -> dict:
    return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


def instance_to_dict(inst: ScdInstance) -> dict:
    return {
        "facilities": [asdict(f) for f in inst.facilities],
        "consumers": [asdict(c) for c in inst.consumers],
        "costs": {
            "ship_clean": np.asarray(inst.costs.ship_clean).tolist(),
            "ship_tainted": np.asarray(inst.costs.ship_tainted).tolist(),
            "discard": np.asarray(inst.costs.discard).tolist(),
        },
        "meta": inst.meta,
    }


def _require(obj: dict, key: str, path: str) -> Any:
    if not isinstance(obj, dict) or key not in obj:
        raise InstanceError(f"{path}{key}", f"missing field {path}{key}")
    return obj[key]


def instance_from_dict(data: dict, validate: bool = True) -> ScdInstance:
    fac_raw = _require(data, "facilities", "")
    con_raw = _require(data, "consumers", "")
    costs_raw = _require(data, "costs", "")
    facilities = []
    for i, f in enumerate(fac_raw):
        kw = {fl.name: _require(f, fl.name, f"facilities[{i}].") for fl in fields(FacilityParams)}
        try:
            facilities.append(FacilityParams(
                id=int(kw["id"]), fixed_cost=int(kw["fixed_cost"]), capacity=int(kw["capacity"]),
                inspection_cost=int(kw["inspection_cost"]), reliability=float(kw["reliability"]),
                taint_rate=float(kw["taint_rate"]), residual_taint_rate=float(kw["residual_taint_rate"]),
            ))
        except (TypeError, ValueError) as exc:
            raise InstanceError(f"facilities[{i}]", f"bad value in facilities[{i}]: {exc}") from None
    consumers = []
    for i, c in enumerate(con_raw):
        try:
            consumers.append(ConsumerParams(id=int(_require(c, "id", f"consumers[{i}]."))
                                            , demand=int(_require(c, "demand", f"consumers[{i}]."))))
        except (TypeError, ValueError) as exc:
            raise InstanceError(f"consumers[{i}]", f"bad value in consumers[{i}]: {exc}") from None
    mats = {}
    for name in ("ship_clean", "ship_tainted", "discard"):
        raw = _require(costs_raw, name, "costs.")
        try:
            arr = np.array(raw, dtype=float)
        except (TypeError, ValueError):
            raise InstanceError(f"costs.{name}", f"costs.{name} is not a numeric matrix") from None
        if arr.shape != (len(facilities), len(consumers)):
            raise InstanceError(f"costs.{name}",
                                f"costs.{name} has shape {arr.shape}, expected {(len(facilities), len(consumers))}")
        mats[name] = arr
    if not facilities:
        raise InstanceError("facilities", "facilities list is empty")
    # money matrices are integral; keep their integer dtype so round-trips compare equal
    costs = CostMatrices(
        mats["ship_clean"].astype(np.int64) if np.all(mats["ship_clean"] == np.round(mats["ship_clean"])) else mats["ship_clean"],
        mats["ship_tainted"].astype(np.int64) if np.all(mats["ship_tainted"] == np.round(mats["ship_tainted"])) else mats["ship_tainted"],
        mats["discard"],
    )
    meta = dict(data.get("meta") or {})
    inst = build_instance(facilities, consumers, costs, meta)
    if validate:
        validate_instance(inst, meta.get("bounds"))
    return inst


def save_instance(inst: ScdInstance, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=1) + "\n")


def load_instance(path, validate: bool = True) -> ScdInstance:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceError("<file>", f"not valid JSON: {exc}") from None
    return instance_from_dict(data, validate=validate)

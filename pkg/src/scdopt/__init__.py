"""Solvers for two-stage supply chain design under facility disruption and inspection."""

from .instance import (
    GenConfig,
    ScdInstance,
    enumerate_scenarios,
    generate_instance,
    load_instance,
    save_instance,
)
from .kernels import BACKEND
from .model import CostBreakdown, Solution, evaluate_objective, make_solution, percent_gap

__all__ = [
    "BACKEND",
    "CostBreakdown",
    "GenConfig",
    "ScdInstance",
    "Solution",
    "enumerate_scenarios",
    "evaluate_objective",
    "generate_instance",
    "load_instance",
    "make_solution",
    "percent_gap",
    "save_instance",
]

__version__ = "0.1.0"

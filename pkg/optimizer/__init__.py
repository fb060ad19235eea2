"""Exact offloading optimiser: branch-and-bound plus the exhaustive oracle that certifies it."""

from .branch_and_bound import ENERGY_ONLY, Solution, lower_bound, solve_energy_min, solve_weighted
from .instance import (
    OffloadInstance,
    instance_from_snapshot,
    instance_from_tasks,
    load_instance_csv,
    objective,
    random_instance,
    save_instance_csv,
    violations,
)
from .oracle import brute_force_oracle

__all__ = [
    "ENERGY_ONLY",
    "Solution",
    "lower_bound",
    "solve_weighted",
    "solve_energy_min",
    "brute_force_oracle",
    "OffloadInstance",
    "instance_from_tasks",
    "instance_from_snapshot",
    "random_instance",
    "objective",
    "violations",
    "save_instance_csv",
    "load_instance_csv",
]

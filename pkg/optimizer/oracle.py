"""Exhaustive enumeration, used to certify the branch-and-bound solver."""

from __future__ import annotations

import itertools

from shared.config import ORACLE_MAX_LEAVES
from shared.errors import InfeasibleError, InstanceTooLargeError
from shared.schemas import Weights

from .branch_and_bound import Solution, make_solution
from .instance import OffloadInstance, objective, violations


def brute_force_oracle(
    inst: OffloadInstance,
    w: Weights,
    latency_bound_s: float | None = None,
    *,
    max_leaves: int = ORACLE_MAX_LEAVES,
) -> Solution:
    """Minimum ``(objective, venue vector)`` over every feasible assignment."""
    n, v = inst.num_tasks, inst.num_venues
    leaves = v**n
    if leaves > max_leaves:
        raise InstanceTooLargeError(f"{v}^{n} = {leaves} assignments exceeds the {max_leaves} guard")

    if latency_bound_s is not None:
        hopeless = [
            inst.task_ids[i]
            for i in range(n)
            if not any(inst.venue_allowed(i, j) and inst.latency[i, j] <= latency_bound_s for j in range(v))
        ]
        if hopeless:
            raise InfeasibleError("no venue meets the latency bound", hopeless)

    best: tuple[float, tuple[int, ...]] | None = None
    for venues in itertools.product(range(v), repeat=n):
        if violations(inst, venues, latency_bound_s):
            continue
        key = (objective(inst, w, venues), venues)
        if best is None or key < best:
            best = key
    if best is None:
        raise InfeasibleError("no assignment satisfies the constraints")
    return make_solution(inst, w, best[1], nodes=leaves)


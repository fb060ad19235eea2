"""Depth-first branch-and-bound for the offloading assignment problems.

Two problems share one search:

- **weighted**    minimise Σ w_a·T_i + w_b·E_i under server capacity.
- **energy-min**  minimise Σ E_i with every T_i within a latency bound.

Tasks are branched in index order, venues in ascending cost.  A greedy
assignment seeds the incumbent.  The bound adds each unassigned task's
cheapest venue, ignoring capacity coupling.  Among equal objectives the
lexicographically smallest venue vector wins, so the result matches the
exhaustive oracle exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

from shared.errors import InfeasibleError
from shared.schemas import Assignment, Weights

from .instance import OffloadInstance, entry_cost, objective, serial_waits, totals

logger = logging.getLogger("optimizer.branch_and_bound")

# Weights of the energy-only objective.
ENERGY_ONLY = Weights(w_a=0, w_b=1, phi=1)

# Relative slack of the fast floating-point bound screen.
_SCREEN_TOL = 1e-9


@dataclass(frozen=True)
class Solution:
    """Result of one solve.  ``optimal`` is False only when a node limit cut the search."""

    assignment: Assignment
    objective: float
    total_latency_s: float
    total_energy_j: float
    optimal: bool = True
    nodes: int = 0

    def consistent_with(self, inst: OffloadInstance, w: Weights) -> bool:
        return objective(inst, w, self.assignment.venues) == self.objective


def make_solution(inst: OffloadInstance, w: Weights, venues: Sequence[int], *, optimal: bool = True, nodes: int = 0) -> Solution:
    lat, en = totals(inst, venues)
    return Solution(
        assignment=Assignment(tuple(venues)),
        objective=objective(inst, w, venues),
        total_latency_s=lat,
        total_energy_j=en,
        optimal=optimal,
        nodes=nodes,
    )


def lower_bound(partial: Sequence[int], inst: OffloadInstance, w: Weights) -> float:
    """Admissible bound for any completion of ``partial`` (venues of tasks 0..len-1)."""
    depth = len(partial)
    waits = serial_waits(inst, partial)
    assigned = [entry_cost(inst, w, i, j, waits[i]) for i, j in enumerate(partial)]
    rest = [
        min(entry_cost(inst, w, i, j) for j in range(inst.num_venues) if inst.venue_allowed(i, j))
        for i in range(depth, inst.num_tasks)
    ]
    return math.fsum(assigned + rest)


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------

class _Search:
    """One branch-and-bound run over ``inst`` with weights ``w``."""

    def __init__(
        self,
        inst: OffloadInstance,
        w: Weights,
        latency_bound_s: float | None,
        node_limit: int | None,
    ) -> None:
        self.inst = inst
        self.w = w
        self.bound_s = latency_bound_s
        self.node_limit = node_limit
        self.serialized = inst.queue_model == "serialized"
        n = inst.num_tasks

        self.base: list[list[float]] = [
            [entry_cost(inst, w, i, j) for j in range(inst.num_venues)] for i in range(n)
        ]
        self.order: list[list[int]] = []
        empty: list[int] = []
        for i in range(n):
            venues = [
                j
                for j in range(inst.num_venues)
                if inst.venue_allowed(i, j) and (latency_bound_s is None or inst.latency[i, j] <= latency_bound_s)
            ]
            if not venues:
                empty.append(inst.task_ids[i])
            self.order.append(sorted(venues, key=lambda j, i=i: (self.base[i][j], j)))
        if empty:
            reason = "no venue meets the latency bound" if latency_bound_s is not None else "no venue allowed"
            raise InfeasibleError(reason, empty)

        self.min_cost = [self.base[i][self.order[i][0]] for i in range(n)]
        self.suffix = [0.0] * (n + 1)
        for i in range(n - 1, -1, -1):
            self.suffix[i] = self.suffix[i + 1] + self.min_cost[i]

        self.best_obj = math.inf
        self.best_vec: tuple[int, ...] | None = None
        self.nodes = 0
        self.cut = False

    # -- placement checks ------------------------------------------------------

    def _place(self, i: int, j: int, used: list[float], count: list[int]) -> float | None:
        """Cost of task ``i`` on venue ``j`` given current server usage, or None if infeasible."""
        if j == 0:
            return self.base[i][0]
        inst = self.inst
        s = j - 1
        if used[s] + float(inst.cycles[i]) > inst.capacity_cycles[s]:
            return None
        if inst.server_slots is not None and count[s] + 1 > inst.server_slots[s]:
            return None
        if not self.serialized:
            return self.base[i][j]
        extra = used[s] / float(inst.server_rates[s])
        if self.bound_s is not None and float(inst.latency[i, j]) + extra > self.bound_s:
            return None
        return entry_cost(inst, self.w, i, j, extra)

    def _greedy(self) -> None:
        inst = self.inst
        used = [0.0] * inst.num_servers
        count = [0] * inst.num_servers
        venues: list[int] = []
        costs: list[float] = []
        for i in range(inst.num_tasks):
            for j in self.order[i]:
                c = self._place(i, j, used, count)
                if c is not None:
                    break
            else:
                return
            venues.append(j)
            costs.append(c)
            if j:
                used[j - 1] += float(inst.cycles[i])
                count[j - 1] += 1
        self.best_obj = math.fsum(costs)
        self.best_vec = tuple(venues)

    def _pruned(self, prefix: list[int], costs: list[float], approx: float) -> bool:
        if self.best_vec is None:
            return False
        tol = _SCREEN_TOL * max(1.0, abs(self.best_obj))
        if approx > self.best_obj + tol:
            return True
        if approx < self.best_obj - tol:
            return False
        depth = len(prefix)
        exact = math.fsum(costs + self.min_cost[depth:])
        if exact > self.best_obj:
            return True
        return exact == self.best_obj and tuple(prefix) > self.best_vec[:depth]

    # -- main loop -------------------------------------------------------------

    def run(self) -> None:
        inst = self.inst
        n = inst.num_tasks
        self._greedy()

        used = [0.0] * inst.num_servers
        count = [0] * inst.num_servers
        prefix: list[int] = []
        costs: list[float] = []
        partial = [0.0]
        used_before: list[float] = []
        pos = [0] * (n + 1)
        depth = 0

        def backtrack() -> None:
            j = prefix.pop()
            costs.pop()
            partial.pop()
            prev = used_before.pop()
            if j:
                used[j - 1] = prev
                count[j - 1] -= 1

        while depth >= 0:
            if depth == n:
                obj = math.fsum(costs)
                vec = tuple(prefix)
                if self.best_vec is None or (obj, vec) < (self.best_obj, self.best_vec):
                    self.best_obj, self.best_vec = obj, vec
                depth -= 1
                if depth >= 0:
                    backtrack()
                continue
            options = self.order[depth]
            if pos[depth] >= len(options):
                pos[depth] = 0
                depth -= 1
                if depth >= 0:
                    backtrack()
                continue
            j = options[pos[depth]]
            pos[depth] += 1
            c = self._place(depth, j, used, count)
            if c is None:
                continue
            self.nodes += 1
            if self.node_limit is not None and self.nodes > self.node_limit:
                self.cut = True
                return
            prefix.append(j)
            costs.append(c)
            if self._pruned(prefix, costs, partial[-1] + c + self.suffix[depth + 1]):
                prefix.pop()
                costs.pop()
                continue
            partial.append(partial[-1] + c)
            if j:
                used_before.append(used[j - 1])
                used[j - 1] += float(inst.cycles[depth])
                count[j - 1] += 1
            else:
                used_before.append(0.0)
            depth += 1


def _solve(
    inst: OffloadInstance,
    w: Weights,
    latency_bound_s: float | None,
    node_limit: int | None,
) -> Solution:
    if inst.num_tasks == 0:
        return make_solution(inst, w, ())
    search = _Search(inst, w, latency_bound_s, node_limit)
    search.run()
    if search.best_vec is None:
        blocked = [inst.task_ids[i] for i in range(inst.num_tasks) if not inst.venue_allowed(i, 0)]
        raise InfeasibleError("server capacity cannot host the tasks that must offload", blocked)
    if search.cut:
        logger.debug("Node limit %d reached; returning incumbent", node_limit)
    return make_solution(inst, w, search.best_vec, optimal=not search.cut, nodes=search.nodes)


def solve_weighted(inst: OffloadInstance, w: Weights, *, node_limit: int | None = None) -> Solution:
    """Minimise the weighted latency/energy objective under server capacity."""
    return _solve(inst, w, None, node_limit)


def solve_energy_min(inst: OffloadInstance, latency_bound_s: float, *, node_limit: int | None = None) -> Solution:
    """Minimise total energy with every task finishing within ``latency_bound_s``.

    Raises ``InfeasibleError`` naming the tasks that meet the bound nowhere.
    """
    if latency_bound_s <= 0:
        raise ValueError(f"latency bound must be > 0, got {latency_bound_s}")
    return _solve(inst, ENERGY_ONLY, latency_bound_s, node_limit)

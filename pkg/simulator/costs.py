"""Latency and energy cost models for local and offloaded execution.

Local:      t_comp = C / f_local          e_comp = κ_local · C · f_local²
Offloaded:  t_comm = D / rate             e_tx   = P_tx · t_comm
            t_queue = backlog / f_server
            t_comp = C / f_server         e_comp = κ_server · C · f_server²

``C = D · S`` is the task's total cycle demand.  The result download is
ignored (negligible next to the uplink).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

from shared.schemas import EdgeServer, Link, Task, UserNode


@dataclass(frozen=True, slots=True)
class CostBreakdown:
    """Time and energy components of one task execution."""

    t_comm_s: float
    t_comp_s: float
    t_queue_s: float
    e_tx_j: float
    e_comp_j: float

    @property
    def latency_s(self) -> float:
        return self.t_comm_s + self.t_queue_s + self.t_comp_s

    @property
    def energy_j(self) -> float:
        return self.e_tx_j + self.e_comp_j


class QueuedServer(Protocol):
    """Anything exposing a server and its current backlog (live state or snapshot)."""

    @property
    def server(self) -> EdgeServer: ...

    @property
    def queued_cycles(self) -> float: ...


def local_cost(task: Task, node: UserNode) -> CostBreakdown:
    cycles = task.total_cycles
    f = node.cpu_rate_hz
    return CostBreakdown(
        t_comm_s=0.0,
        t_comp_s=cycles / f,
        t_queue_s=0.0,
        e_tx_j=0.0,
        e_comp_j=node.kappa_local * cycles * f * f,
    )


def offload_cost(
    task: Task,
    link: Link,
    server_state: QueuedServer,
    *,
    tx_power_w: float,
) -> CostBreakdown:
    """Cost of sending ``task`` over ``link`` to the server behind ``server_state``.

    The queueing delay is the backlog present at the moment of enqueue.
    """
    server = server_state.server
    f = server.cpu_rate_hz
    cycles = task.total_cycles
    t_comm = task.data_size_bits / link.rate_bps
    return CostBreakdown(
        t_comm_s=t_comm,
        t_comp_s=cycles / f,
        t_queue_s=server_state.queued_cycles / f,
        e_tx_j=tx_power_w * t_comm,
        e_comp_j=server.kappa_server * cycles * f * f,
    )


def reward_from_time(total_execution_time_s: float) -> float:
    """Step reward of a completed task: its negated end-to-end latency."""
    if not total_execution_time_s > 0:
        raise ValueError(f"execution time must be > 0, got {total_execution_time_s}")
    return -total_execution_time_s

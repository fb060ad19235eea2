"""Slotted MEC environment: arrivals, FIFO backlogs, admission, drops, rewards.

One slot proceeds as::

    begin_slot()   Poisson arrivals, deferred tasks promoted into pending
    snapshot()     read-only view handed to the policy
    step(actions)  head-of-queue task of every user admitted in user-index
                   order, then every queue serves min(backlog, rate·dt)
                   cycles, slot += 1

An environment instance is strictly sequential.  Independent instances
share no mutable state.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from shared.errors import ActionLengthError, InvariantViolation
from shared.records import SlotMetrics, TaskStatus, TraceRecord
from shared.schemas import EdgeServer, Link, SystemConfig, Task, UserNode

from .arrivals import generate_arrivals
from .costs import CostBreakdown, local_cost, offload_cost, reward_from_time

logger = logging.getLogger("simulator.environment")

_TOL = 1e-9


def _drain(backlog: deque[float], budget: float) -> float:
    """Serve up to ``budget`` cycles from the head of ``backlog``; return cycles served."""
    served = 0.0
    while backlog and budget > 0:
        head = backlog[0]
        if head <= budget:
            backlog.popleft()
            budget -= head
            served += head
        else:
            backlog[0] = head - budget
            served += budget
            budget = 0.0
    return served


# ═══════════════════════════════════════════════════════════════════════════
# Live state
# ═══════════════════════════════════════════════════════════════════════════

@dataclass
class ServerState:
    """A server and its FIFO backlog (remaining cycles per queued task)."""

    server: EdgeServer
    backlog: deque[float] = field(default_factory=deque)

    @property
    def queued_cycles(self) -> float:
        return math.fsum(self.backlog)

    @property
    def queued_tasks(self) -> int:
        return len(self.backlog)

    def can_admit(self, cycles: float) -> bool:
        return (
            self.queued_tasks + 1 <= self.server.queue_limit
            and self.queued_cycles + cycles <= self.server.capacity_cycles
        )

    def admit(self, cycles: float) -> None:
        self.backlog.append(float(cycles))


@dataclass
class DeviceState:
    """One user's pending tasks, deferred overflow, and local CPU backlog."""

    node: UserNode
    pending: deque[Task] = field(default_factory=deque)
    deferred: deque[Task] = field(default_factory=deque)
    backlog: deque[float] = field(default_factory=deque)
    dropped: int = 0

    @property
    def head(self) -> Task | None:
        return self.pending[0] if self.pending else None

    @property
    def queued_tasks(self) -> int:
        return len(self.backlog)

    @property
    def queued_cycles(self) -> float:
        return math.fsum(self.backlog)

    def can_admit_local(self) -> bool:
        return len(self.backlog) < self.node.local_queue_capacity


@dataclass(frozen=True, slots=True)
class CompletedTask:
    task: Task
    venue: int
    cost: CostBreakdown
    slot: int

    @property
    def latency_s(self) -> float:
        return self.cost.latency_s

    @property
    def energy_j(self) -> float:
        return self.cost.energy_j


@dataclass(frozen=True, slots=True)
class DroppedTask:
    task: Task
    venue: int
    slot: int


@dataclass(frozen=True, slots=True)
class SlotService:
    """Cycles one queue held before the end-of-slot drain, its budget, and what it served."""

    label: str
    before: float
    budget: float
    served: float


def _serve(label: str, queue: ServerState | DeviceState, budget: float) -> SlotService:
    before = queue.queued_cycles
    return SlotService(label=label, before=before, budget=budget, served=_drain(queue.backlog, budget))


@dataclass
class EnvState:
    """Everything that evolves during an episode."""

    slot: int
    servers: list[ServerState]
    devices: list[DeviceState]
    completed: list[CompletedTask] = field(default_factory=list)
    dropped_tasks: list[DroppedTask] = field(default_factory=list)
    generated: int = 0
    next_task_id: int = 0

    @property
    def pending(self) -> list[deque[Task]]:
        return [d.pending for d in self.devices]

    @property
    def dropped(self) -> list[int]:
        return [d.dropped for d in self.devices]

    def waiting_count(self) -> int:
        """Pending plus deferred tasks over all users."""
        return sum(len(d.pending) + len(d.deferred) for d in self.devices)


# ═══════════════════════════════════════════════════════════════════════════
# Read-only views handed to policies
# ═══════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True, slots=True)
class ServerView:
    server: EdgeServer
    queued_cycles: float
    queued_tasks: int

    def can_admit(self, cycles: float) -> bool:
        return (
            self.queued_tasks + 1 <= self.server.queue_limit
            and self.queued_cycles + cycles <= self.server.capacity_cycles
        )


@dataclass(frozen=True, slots=True)
class DeviceView:
    node: UserNode
    queued_tasks: int
    head: Task | None

    def can_admit_local(self) -> bool:
        return self.queued_tasks < self.node.local_queue_capacity


@dataclass(frozen=True)
class EnvSnapshot:
    slot: int
    servers: tuple[ServerView, ...]
    devices: tuple[DeviceView, ...]

    def with_admission(self, venue: int, cycles: float) -> EnvSnapshot:
        """This view with ``cycles`` more queued on server ``venue`` (1-based)."""
        srv = self.servers[venue - 1]
        moved = replace(srv, queued_cycles=srv.queued_cycles + cycles, queued_tasks=srv.queued_tasks + 1)
        servers = self.servers[: venue - 1] + (moved,) + self.servers[venue:]
        return replace(self, servers=servers)


# ═══════════════════════════════════════════════════════════════════════════
# Step output
# ═══════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class StepResult:
    """Per-user outcome of one slot.

    ``rewards[k]`` is ``None`` for users with nothing to decide, the negative
    latency for a completed task, and the drop penalty for a dropped one.
    ``venues[k]`` is the venue the task was sent to.
    """

    state: EnvState
    rewards: list[float | None]
    venues: list[int | None]
    dropped: list[bool]
    latencies: list[float | None]
    metrics: SlotMetrics


# ═══════════════════════════════════════════════════════════════════════════
# Helpers over live state or snapshots
# ═══════════════════════════════════════════════════════════════════════════

def server_loads(state: EnvState | EnvSnapshot) -> list[float]:
    """Queued cycles per server, index-aligned with ``state.servers``."""
    return [s.queued_cycles for s in state.servers]


def least_loaded_server(state: EnvState | EnvSnapshot) -> int:
    """Venue (1-based) of the server with the fewest queued cycles; ties → lowest index."""
    loads = server_loads(state)
    return int(np.argmin(loads)) + 1


# ═══════════════════════════════════════════════════════════════════════════
# Environment
# ═══════════════════════════════════════════════════════════════════════════

class MecEnvironment:
    """K users, M servers, slotted time.  See the module docstring for the slot cycle."""

    def __init__(
        self,
        config: SystemConfig,
        rng: np.random.Generator,
        *,
        trace: bool = False,
        strict: bool = False,
    ) -> None:
        self.config = config
        self.rng = rng
        self.trace = trace
        self.strict = strict
        self.nodes: list[UserNode] = config.user_nodes()
        self.edge_servers: list[EdgeServer] = config.edge_servers()
        self._links: dict[tuple[int, int], Link] = {}
        self.trace_records: list[TraceRecord] = []
        self._checked_completed = 0
        self._service: list[SlotService] = []
        self.state = self.reset()

    @property
    def num_users(self) -> int:
        return self.config.num_users

    @property
    def num_servers(self) -> int:
        return self.config.num_servers

    @property
    def last_service(self) -> tuple[SlotService, ...]:
        """Per-queue drain of the most recent step: servers first, then devices."""
        return tuple(self._service)

    def link(self, user: int, server: int) -> Link:
        key = (user, server)
        if key not in self._links:
            self._links[key] = self.config.link(user, server)
        return self._links[key]

    # -- episode lifecycle ---------------------------------------------------

    def reset(self) -> EnvState:
        """Fresh episode: empty queues, slot 0.  The random stream carries on."""
        self.state = EnvState(
            slot=0,
            servers=[ServerState(server=s) for s in self.edge_servers],
            devices=[DeviceState(node=n) for n in self.nodes],
        )
        self.trace_records = []
        self._checked_completed = 0
        self._service = []
        return self.state

    def begin_slot(self) -> list[Task]:
        """Generate this slot's arrivals and top up pending queues from the overflow."""
        st = self.state
        cap = self.config.tasks_per_user_max
        arrivals = generate_arrivals(
            self.config.arrival_rate_lambda,
            self.num_users,
            st.slot,
            self.rng,
            data_size_bits=self.config.data_size_bits,
            cycles_per_bit=self.config.cycles_per_bit,
            first_task_id=st.next_task_id,
        )
        st.next_task_id += len(arrivals)
        st.generated += len(arrivals)
        for dev in st.devices:
            while dev.deferred and len(dev.pending) < cap:
                dev.pending.append(dev.deferred.popleft())
        for task in arrivals:
            dev = st.devices[task.owner]
            if len(dev.pending) < cap and not dev.deferred:
                dev.pending.append(task)
            else:
                dev.deferred.append(task)
        return arrivals

    def snapshot(self) -> EnvSnapshot:
        st = self.state
        return EnvSnapshot(
            slot=st.slot,
            servers=tuple(
                ServerView(server=s.server, queued_cycles=s.queued_cycles, queued_tasks=s.queued_tasks)
                for s in st.servers
            ),
            devices=tuple(
                DeviceView(node=d.node, queued_tasks=d.queued_tasks, head=d.head)
                for d in st.devices
            ),
        )

    # -- the slot transition -------------------------------------------------

    def step(self, actions: Sequence[int]) -> StepResult:
        """Admit every user's head task to its chosen venue, then serve one slot."""
        st = self.state
        k_users = self.num_users
        if len(actions) != k_users:
            raise ActionLengthError(f"expected {k_users} actions, got {len(actions)}")

        m = self.num_servers
        penalty = self.config.drop_penalty_reward
        rewards: list[float | None] = [None] * k_users
        venues: list[int | None] = [None] * k_users
        dropped: list[bool] = [False] * k_users
        latencies: list[float | None] = [None] * k_users
        n_done = n_drop = 0
        energy = latency = 0.0

        for k, dev in enumerate(st.devices):
            if not dev.pending:
                continue
            venue = int(actions[k])
            if not 0 <= venue <= m:
                raise ValueError(f"user {k}: venue {venue} outside 0..{m}")
            task = dev.pending.popleft()
            venues[k] = venue

            cost: CostBreakdown | None = None
            if venue == 0:
                if dev.can_admit_local():
                    cost = local_cost(task, dev.node)
                    dev.backlog.append(float(task.total_cycles))
            else:
                srv = st.servers[venue - 1]
                if srv.can_admit(task.total_cycles):
                    cost = offload_cost(task, self.link(k, venue), srv, tx_power_w=dev.node.tx_power_w)
                    srv.admit(task.total_cycles)

            if cost is None:
                dev.dropped += 1
                st.dropped_tasks.append(DroppedTask(task=task, venue=venue, slot=st.slot))
                rewards[k] = penalty
                dropped[k] = True
                n_drop += 1
                self._record(task, venue, None)
            else:
                st.completed.append(CompletedTask(task=task, venue=venue, cost=cost, slot=st.slot))
                rewards[k] = reward_from_time(cost.latency_s)
                latencies[k] = cost.latency_s
                n_done += 1
                energy += cost.energy_j
                latency += cost.latency_s
                self._record(task, venue, cost)

        dt = self.config.slot_duration_s
        self._service = [_serve(f"server {srv.server.id}", srv, srv.server.cpu_rate_hz * dt) for srv in st.servers]
        self._service += [_serve(f"user {k} device", dev, dev.node.cpu_rate_hz * dt) for k, dev in enumerate(st.devices)]

        metrics = SlotMetrics(slot=st.slot, completed=n_done, dropped=n_drop, energy_j=energy, latency_s=latency)
        logger.debug("slot %d: %d completed, %d dropped", st.slot, n_done, n_drop)
        st.slot += 1
        if self.strict:
            self.check_invariants()
        return StepResult(
            state=st,
            rewards=rewards,
            venues=venues,
            dropped=dropped,
            latencies=latencies,
            metrics=metrics,
        )

    def run_slot(self, decide: Callable[[EnvSnapshot], Sequence[int]]) -> StepResult:
        """Arrivals, one policy decision, one step."""
        self.begin_slot()
        return self.step(decide(self.snapshot()))

    def _record(self, task: Task, venue: int, cost: CostBreakdown | None) -> None:
        if not self.trace:
            return
        if cost is None:
            rec = TraceRecord(
                slot=self.state.slot, user=task.owner, task_id=task.id, venue=venue, status=TaskStatus.DROPPED
            )
        else:
            rec = TraceRecord(
                slot=self.state.slot,
                user=task.owner,
                task_id=task.id,
                venue=venue,
                t_comm=cost.t_comm_s,
                t_queue=cost.t_queue_s,
                t_comp=cost.t_comp_s,
                e_tx=cost.e_tx_j,
                e_comp=cost.e_comp_j,
                status=TaskStatus.COMPLETED,
            )
        self.trace_records.append(rec)

    # -- invariants ------------------------------------------------------------

    def check_invariants(self) -> None:
        """Raise ``InvariantViolation`` on the first broken invariant."""
        st = self.state
        accounted = st.waiting_count() + len(st.completed) + sum(st.dropped)
        if accounted != st.generated:
            raise InvariantViolation(f"task conservation: generated {st.generated}, accounted {accounted}")
        if sum(st.dropped) != len(st.dropped_tasks):
            raise InvariantViolation("per-user drop counters disagree with the drop log")
        cap = self.config.tasks_per_user_max
        for k, dev in enumerate(st.devices):
            if len(dev.pending) > cap:
                raise InvariantViolation(f"user {k}: {len(dev.pending)} pending > {cap}")
            if dev.queued_tasks > dev.node.local_queue_capacity:
                raise InvariantViolation(f"user {k}: device queue over capacity")
        for srv in st.servers:
            if srv.queued_tasks > srv.server.queue_limit:
                raise InvariantViolation(f"server {srv.server.id}: queue over limit")
            if any(c < 0 for c in srv.backlog):
                raise InvariantViolation(f"server {srv.server.id}: negative backlog")
            if srv.queued_cycles > srv.server.capacity_cycles * (1 + _TOL):
                raise InvariantViolation(f"server {srv.server.id}: backlog over capacity")
        for done in st.completed[self._checked_completed:]:
            c = done.cost
            if done.venue == 0 and (c.t_comm_s != 0.0 or c.e_tx_j != 0.0):
                raise InvariantViolation(f"task {done.task.id}: local execution with transmission cost")
            if not (done.latency_s > 0 and done.energy_j > 0):
                raise InvariantViolation(f"task {done.task.id}: non-positive latency or energy")
        self._checked_completed = len(st.completed)
        for svc in self._service:
            expected = min(svc.before, svc.budget)
            if abs(svc.served - expected) > _TOL * max(1.0, svc.budget):
                raise InvariantViolation(
                    f"{svc.label}: served {svc.served!r} cycles, expected min(backlog, rate·dt) = {expected!r}"
                )

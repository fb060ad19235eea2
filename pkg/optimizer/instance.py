"""Offloading problem instances: cost tables, builders, and CSV fixtures.

An instance is a dense ``n × (M+1)`` table of (latency, energy) pairs, one
row per task and one column per venue (0 = local, j = server j), plus the
per-server capacities that couple the rows.

Builders
--------
- ``instance_from_tasks``     – idle servers, cost ops from ``simulator.costs``.
- ``instance_from_snapshot``  – head-of-queue tasks of a live slot; current backlogs
                                count as queueing delay and reduce capacity.
- ``random_instance``         – integer-valued random tables for certification runs.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from shared.schemas import SystemConfig, Task, Weights
from simulator.costs import local_cost, offload_cost
from simulator.environment import EnvSnapshot, ServerView

logger = logging.getLogger("optimizer.instance")

QueueModel = Literal["independent", "serialized"]

CSV_COLUMNS: tuple[str, ...] = ("task_id", "venue_id", "latency_s", "energy_j", "cycles")


@dataclass(frozen=True, eq=False)
class OffloadInstance:
    """Cost table and constraints of one offloading decision.

    ``latency`` and ``energy`` are ``(n, M+1)``; ``cycles`` is ``(n,)``;
    ``capacity_cycles`` and ``server_rates`` are ``(M,)``.  ``server_slots``
    optionally caps how many tasks each server may still take.  Under the
    ``serialized`` queue model a task on server j also waits for the cycles
    of every lower-indexed task placed on j.
    """

    task_ids: tuple[int, ...]
    latency: np.ndarray
    energy: np.ndarray
    cycles: np.ndarray
    capacity_cycles: np.ndarray
    server_rates: np.ndarray
    server_slots: tuple[int, ...] | None = None
    local_allowed: tuple[bool, ...] | None = None
    latency_bound_s: float | None = None
    latency_scale: float = 1.0
    energy_scale: float = 1.0
    queue_model: QueueModel = "independent"

    def __post_init__(self) -> None:
        n = len(self.task_ids)
        m = len(self.capacity_cycles)
        for name in ("latency", "energy"):
            arr = getattr(self, name)
            if arr.shape != (n, m + 1):
                raise ValueError(f"{name} table is {arr.shape}, expected {(n, m + 1)}")
            if n and not (np.all(np.isfinite(arr)) and np.all(arr > 0)):
                raise ValueError(f"{name} entries must be finite and positive")
        if self.cycles.shape != (n,):
            raise ValueError(f"cycles has shape {self.cycles.shape}, expected {(n,)}")
        if self.server_rates.shape != (m,) or np.any(self.server_rates <= 0):
            raise ValueError("server_rates must hold one positive rate per server")
        if np.any(self.capacity_cycles < 0):
            raise ValueError("capacity_cycles must be >= 0")
        if self.server_slots is not None and len(self.server_slots) != m:
            raise ValueError("server_slots must have one entry per server")
        if self.local_allowed is not None and len(self.local_allowed) != n:
            raise ValueError("local_allowed must have one entry per task")
        if self.latency_bound_s is not None and self.latency_bound_s <= 0:
            raise ValueError("latency_bound_s must be > 0")
        if self.latency_scale <= 0 or self.energy_scale <= 0:
            raise ValueError("cost scales must be > 0")

    @property
    def num_tasks(self) -> int:
        return len(self.task_ids)

    @property
    def num_servers(self) -> int:
        return len(self.capacity_cycles)

    @property
    def num_venues(self) -> int:
        return self.num_servers + 1

    def venue_allowed(self, i: int, j: int) -> bool:
        return j != 0 or self.local_allowed is None or self.local_allowed[i]

    def with_queue_model(self, queue_model: QueueModel) -> OffloadInstance:
        return _replace(self, queue_model=queue_model)

    def normalized(self) -> OffloadInstance:
        """Copy whose weighted costs are divided by the mean local latency/energy."""
        if not self.num_tasks:
            return self
        return _replace(
            self,
            latency_scale=float(np.mean(self.latency[:, 0])),
            energy_scale=float(np.mean(self.energy[:, 0])),
        )


def _replace(inst: OffloadInstance, **changes: object) -> OffloadInstance:
    fields = {name: getattr(inst, name) for name in inst.__dataclass_fields__}
    fields.update(changes)
    return OffloadInstance(**fields)


# ---------------------------------------------------------------------------
# Cost of one (task, venue) entry
# ---------------------------------------------------------------------------

def entry_latency(inst: OffloadInstance, i: int, j: int, extra_wait_s: float = 0.0) -> float:
    return float(inst.latency[i, j]) + extra_wait_s


def entry_cost(inst: OffloadInstance, w: Weights, i: int, j: int, extra_wait_s: float = 0.0) -> float:
    """Weighted cost ``w_a·T/ts + w_b·E/es`` of putting task ``i`` on venue ``j``."""
    lat = entry_latency(inst, i, j, extra_wait_s)
    return w.w_a * (lat / inst.latency_scale) + w.w_b * (float(inst.energy[i, j]) / inst.energy_scale)


def serial_waits(inst: OffloadInstance, venues: Sequence[int]) -> list[float]:
    """Extra wait per task caused by same-server predecessors (zeros when independent)."""
    waits = [0.0] * len(venues)
    if inst.queue_model != "serialized":
        return waits
    ahead = [0.0] * inst.num_servers
    for i, j in enumerate(venues):
        if j:
            waits[i] = ahead[j - 1] / float(inst.server_rates[j - 1])
            ahead[j - 1] += float(inst.cycles[i])
    return waits


def objective(inst: OffloadInstance, w: Weights, venues: Sequence[int]) -> float:
    """Exactly rounded weighted objective of a full or partial assignment."""
    waits = serial_waits(inst, venues)
    return math.fsum(entry_cost(inst, w, i, j, waits[i]) for i, j in enumerate(venues))


def totals(inst: OffloadInstance, venues: Sequence[int]) -> tuple[float, float]:
    """(total latency, total energy) in raw units."""
    waits = serial_waits(inst, venues)
    lat = math.fsum(entry_latency(inst, i, j, waits[i]) for i, j in enumerate(venues))
    en = math.fsum(float(inst.energy[i, j]) for i, j in enumerate(venues))
    return lat, en


def violations(inst: OffloadInstance, venues: Sequence[int], latency_bound_s: float | None = None) -> list[int]:
    """Indices of tasks whose placement breaks a constraint; empty when feasible.

    Capacity or slot overruns blame every task on the overloaded server.
    """
    bad: set[int] = set()
    used = [0.0] * inst.num_servers
    count = [0] * inst.num_servers
    waits = serial_waits(inst, venues)
    for i, j in enumerate(venues):
        if not inst.venue_allowed(i, j):
            bad.add(i)
        if latency_bound_s is not None and entry_latency(inst, i, j, waits[i]) > latency_bound_s:
            bad.add(i)
        if j:
            used[j - 1] += float(inst.cycles[i])
            count[j - 1] += 1
    for s in range(inst.num_servers):
        over = used[s] > inst.capacity_cycles[s]
        if inst.server_slots is not None and count[s] > inst.server_slots[s]:
            over = True
        if over:
            bad.update(i for i, j in enumerate(venues) if j == s + 1)
    return sorted(bad)


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def _finish(inst: OffloadInstance, config: SystemConfig) -> OffloadInstance:
    inst = inst.with_queue_model(config.costs.optimizer_queue_model)
    return inst.normalized() if config.costs.normalize_costs else inst


def instance_from_tasks(tasks: Sequence[Task], config: SystemConfig) -> OffloadInstance:
    """Instance over ``tasks`` with every server idle and every device free."""
    nodes = config.user_nodes()
    servers = [ServerView(server=s, queued_cycles=0.0, queued_tasks=0) for s in config.edge_servers()]
    n, m = len(tasks), config.num_servers
    latency = np.empty((n, m + 1))
    energy = np.empty((n, m + 1))
    for i, task in enumerate(tasks):
        node = nodes[task.owner]
        loc = local_cost(task, node)
        latency[i, 0], energy[i, 0] = loc.latency_s, loc.energy_j
        for j, view in enumerate(servers, start=1):
            off = offload_cost(task, config.link(task.owner, j), view, tx_power_w=node.tx_power_w)
            latency[i, j], energy[i, j] = off.latency_s, off.energy_j
    inst = OffloadInstance(
        task_ids=tuple(t.id for t in tasks),
        latency=latency,
        energy=energy,
        cycles=np.array([float(t.total_cycles) for t in tasks]),
        capacity_cycles=np.array([s.server.capacity_cycles for s in servers]),
        server_rates=np.array([s.server.cpu_rate_hz for s in servers]),
        server_slots=tuple(s.server.queue_limit for s in servers),
        latency_bound_s=config.latency_bound_s,
    )
    return _finish(inst, config)


def instance_from_snapshot(snapshot: EnvSnapshot, config: SystemConfig) -> tuple[OffloadInstance, list[int]]:
    """Instance over the head task of every user that has one.

    Returns the instance and the user index of each row.  Queueing delay and
    remaining capacity follow the snapshot's backlogs; a user whose device
    queue is full pays the drop penalty as latency on the local entry.
    """
    users = [k for k, d in enumerate(snapshot.devices) if d.head is not None]
    n, m = len(users), len(snapshot.servers)
    penalty_s = abs(config.drop_penalty_reward)
    latency = np.empty((n, m + 1))
    energy = np.empty((n, m + 1))
    tasks: list[Task] = []
    for i, k in enumerate(users):
        dev = snapshot.devices[k]
        task = dev.head
        assert task is not None
        tasks.append(task)
        loc = local_cost(task, dev.node)
        latency[i, 0] = loc.latency_s if dev.can_admit_local() else penalty_s
        energy[i, 0] = loc.energy_j
        for j, view in enumerate(snapshot.servers, start=1):
            off = offload_cost(task, config.link(k, j), view, tx_power_w=dev.node.tx_power_w)
            latency[i, j], energy[i, j] = off.latency_s, off.energy_j
    inst = OffloadInstance(
        task_ids=tuple(t.id for t in tasks),
        latency=latency,
        energy=energy,
        cycles=np.array([float(t.total_cycles) for t in tasks]),
        capacity_cycles=np.array(
            [max(0.0, v.server.capacity_cycles - v.queued_cycles) for v in snapshot.servers]
        ),
        server_rates=np.array([v.server.cpu_rate_hz for v in snapshot.servers]),
        server_slots=tuple(max(0, v.server.queue_limit - v.queued_tasks) for v in snapshot.servers),
    )
    return _finish(inst, config), users


def random_instance(
    rng: np.random.Generator,
    num_tasks: int,
    num_servers: int,
    *,
    max_cost: int = 100,
    tight: bool = True,
) -> OffloadInstance:
    """Integer-valued random instance.

    With ``tight`` the capacities are drawn small enough that the
    constraints usually bind.
    """
    latency = rng.integers(1, max_cost + 1, size=(num_tasks, num_servers + 1)).astype(float)
    energy = rng.integers(1, max_cost + 1, size=(num_tasks, num_servers + 1)).astype(float)
    cycles = rng.integers(1, 11, size=num_tasks).astype(float)
    hi = max(2, int(cycles.sum()) // 2 + 1) if tight else int(cycles.sum()) + 1
    capacity = rng.integers(0, hi + 1, size=num_servers).astype(float)
    rates = rng.integers(1, 6, size=num_servers).astype(float)
    return OffloadInstance(
        task_ids=tuple(range(num_tasks)),
        latency=latency,
        energy=energy,
        cycles=cycles,
        capacity_cycles=capacity,
        server_rates=rates,
    )


# ---------------------------------------------------------------------------
# CSV fixtures
# ---------------------------------------------------------------------------

def save_instance_csv(inst: OffloadInstance, path: str | Path) -> Path:
    """Write the cost table, one row per (task, venue)."""
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for i, tid in enumerate(inst.task_ids):
                for j in range(inst.num_venues):
                    writer.writerow(
                        [tid, j, repr(float(inst.latency[i, j])), repr(float(inst.energy[i, j])), repr(float(inst.cycles[i]))]
                    )
    except OSError as exc:
        raise OSError(f"cannot write instance to {path}: {exc}") from exc
    return path


def load_instance_csv(
    path: str | Path,
    *,
    capacity_cycles: Sequence[float],
    server_rates: Sequence[float] | None = None,
    latency_bound_s: float | None = None,
) -> OffloadInstance:
    """Rebuild an instance from ``save_instance_csv`` output plus server data."""
    path = Path(path)
    rows: dict[int, dict[int, tuple[float, float]]] = {}
    cycles: dict[int, float] = {}
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"{path}: expected columns {CSV_COLUMNS}, got {reader.fieldnames}")
        for row in reader:
            tid, venue = int(row["task_id"]), int(row["venue_id"])
            rows.setdefault(tid, {})[venue] = (float(row["latency_s"]), float(row["energy_j"]))
            cycles[tid] = float(row["cycles"])
    m = len(capacity_cycles)
    task_ids = tuple(rows)
    latency = np.empty((len(task_ids), m + 1))
    energy = np.empty((len(task_ids), m + 1))
    for i, tid in enumerate(task_ids):
        if sorted(rows[tid]) != list(range(m + 1)):
            raise ValueError(f"{path}: task {tid} does not list venues 0..{m}")
        for j, (lat, en) in rows[tid].items():
            latency[i, j], energy[i, j] = lat, en
    logger.info("Loaded instance from %s: %d tasks × %d venues", path, len(task_ids), m + 1)
    return OffloadInstance(
        task_ids=task_ids,
        latency=latency,
        energy=energy,
        cycles=np.array([cycles[t] for t in task_ids]),
        capacity_cycles=np.asarray(capacity_cycles, dtype=float),
        server_rates=np.asarray(server_rates if server_rates is not None else [1.0] * m, dtype=float),
        latency_bound_s=latency_bound_s,
    )

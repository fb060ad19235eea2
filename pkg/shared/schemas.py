"""Core domain models for the MEC offloading toolkit (Pydantic v2 + dataclasses).

Models
------
- **Weights** – integer latency/energy weights ``w_a + w_b = phi``.
- **UserNode** – an IoT device with a local CPU and a radio.
- **EdgeServer** – the MEC server attached to one base station.
- **Link** – uplink from a user to a server.
- **RLParams / CostParams / SweepParams** – the ``[rl]``, ``[costs]`` and ``[sweep]`` sections.
- **SystemConfig** – the full scenario, immutable once validated.

Hot-path value types (**Task**, **Assignment**) are frozen dataclasses:
they are created once per task per slot and never cross a process boundary
unvalidated.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import (
    DEFAULT_ARRIVAL_RATE,
    DEFAULT_CARRIER_FREQ_HZ,
    DEFAULT_CYCLES_PER_BIT,
    DEFAULT_DATA_SIZE_BITS,
    DEFAULT_DISCOUNT,
    DEFAULT_EPISODES,
    DEFAULT_EVAL_EPISODES,
    DEFAULT_EXPLORATION,
    DEFAULT_KAPPA_LOCAL,
    DEFAULT_KAPPA_SERVER,
    DEFAULT_LATENCY_BOUND_S,
    DEFAULT_LEARNING_RATE,
    DEFAULT_LINK_RATE_BPS,
    DEFAULT_LOAD_BUCKETS,
    DEFAULT_LOCAL_CPU_HZ,
    DEFAULT_LOCAL_QUEUE_CAPACITY,
    DEFAULT_MONTE_CARLO_RUNS,
    DEFAULT_NODE_COUNTS,
    DEFAULT_NUM_SERVERS,
    DEFAULT_NUM_USERS,
    DEFAULT_OPTIMIZER_NODE_LIMIT,
    DEFAULT_PHI,
    DEFAULT_SEED,
    DEFAULT_SERVER_CAPACITY_CYCLES,
    DEFAULT_SERVER_CPU_HZ,
    DEFAULT_SERVER_QUEUE_LIMIT,
    DEFAULT_SLOT_DURATION_S,
    DEFAULT_SLOTS_PER_EPISODE,
    DEFAULT_SLOWEST_SERVER_RATIO,
    DEFAULT_TASKS_PER_USER_MAX,
    DEFAULT_TX_POWER_W,
    DEFAULT_W_A,
    DEFAULT_W_B,
)

INT64_MAX = 2**63 - 1


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class PolicyKind(str, Enum):
    """The four offloading schemes compared by the bench."""

    LOCAL_ONLY = "local_only"
    OPTIMIZED = "optimized"
    RL_OFFLOAD = "rl_offload"
    RL_LEAST_LOAD = "rl_least_load"


# Canonical column order of every per-figure export.
POLICY_ORDER: tuple[PolicyKind, ...] = tuple(PolicyKind)


# ---------------------------------------------------------------------------
# Hot-path value types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Task:
    """One unit of computation: ``data_size_bits`` bits at ``cycles_per_bit`` cycles each."""

    id: int
    owner: int
    data_size_bits: int
    cycles_per_bit: int
    arrival_slot: int = 0

    def __post_init__(self) -> None:
        if self.data_size_bits <= 0:
            raise ValueError(f"task {self.id}: data_size_bits must be > 0")
        if self.cycles_per_bit <= 0:
            raise ValueError(f"task {self.id}: cycles_per_bit must be > 0")
        if self.arrival_slot < 0:
            raise ValueError(f"task {self.id}: arrival_slot must be >= 0")
        if self.data_size_bits * self.cycles_per_bit > INT64_MAX:
            raise ValueError(f"task {self.id}: total cycles overflow int64")

    @property
    def total_cycles(self) -> int:
        return self.data_size_bits * self.cycles_per_bit


@dataclass(frozen=True, slots=True)
class Assignment:
    """Dense form of the decision matrix A: one venue per task, 0 = local.

    The one-hot row constraint holds by construction.
    """

    venues: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.venues)

    def __iter__(self) -> Iterator[int]:
        return iter(self.venues)

    def __getitem__(self, i: int) -> int:
        return self.venues[i]

    def as_matrix(self, num_servers: int) -> np.ndarray:
        """Expand to the K×(M+1) binary matrix."""
        a = np.zeros((len(self.venues), num_servers + 1), dtype=np.int8)
        if self.venues:
            a[np.arange(len(self.venues)), list(self.venues)] = 1
        return a

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> Assignment:
        rows = np.asarray(matrix)
        if rows.size and not np.all(rows.sum(axis=1) == 1):
            raise ValueError("every row of A must contain exactly one 1")
        return cls(tuple(int(j) for j in rows.argmax(axis=1))) if rows.size else cls()


def check_assignment(a: Assignment, num_servers: int) -> bool:
    """True iff every venue lies in ``{0..num_servers}``."""
    return all(0 <= v <= num_servers for v in a.venues)


# ---------------------------------------------------------------------------
# Deployment entities
# ---------------------------------------------------------------------------

class UserNode(_Frozen):
    """An IoT device with its own CPU and uplink radio."""

    id: int = Field(..., ge=0, description="User index 0..K-1")
    cpu_rate_hz: float = Field(..., gt=0, description="Local processor speed f_local (cycles/s)")
    tx_power_w: float = Field(..., gt=0, description="Uplink transmit power (W)")
    local_queue_capacity: int = Field(..., ge=1, description="Tasks the device CPU may hold at once")
    kappa_local: float = Field(..., gt=0, description="Effective switched capacitance (J·s²/cycle³)")


class EdgeServer(_Frozen):
    """The MEC server co-located with base station ``id`` (1..M; 0 means local)."""

    id: int = Field(..., ge=1, description="Server index 1..M")
    cpu_rate_hz: float = Field(..., gt=0, description="Server processor speed (cycles/s)")
    capacity_cycles: float = Field(..., gt=0, description="Max queued cycles admissible")
    queue_limit: int = Field(..., ge=1, description="Max queued tasks")
    kappa_server: float = Field(..., ge=0, description="Effective switched capacitance (J·s²/cycle³)")


class Link(_Frozen):
    """Uplink between one user and one server."""

    user: int = Field(..., ge=0)
    server: int = Field(..., ge=1)
    rate_bps: float = Field(..., gt=0, description="Uplink rate (bits/s)")


# ---------------------------------------------------------------------------
# Config sections
# ---------------------------------------------------------------------------

class Weights(_Frozen):
    """Integer trade-off weights; ``w_a > w_b`` means latency-sensitive."""

    w_a: int = Field(default=DEFAULT_W_A, ge=0, description="Latency weight")
    w_b: int = Field(default=DEFAULT_W_B, ge=0, description="Energy weight")
    phi: int = Field(default=DEFAULT_PHI, gt=0, description="Weight total")

    @model_validator(mode="after")
    def _sum_to_phi(self) -> Weights:
        if self.w_a + self.w_b != self.phi:
            raise ValueError("weights must sum to phi")
        return self

    def scaled(self, c: int) -> Weights:
        return Weights(w_a=self.w_a * c, w_b=self.w_b * c, phi=self.phi * c)


class CostParams(_Frozen):
    """Energy model constants plus optimiser switches."""

    tx_power_w: float = Field(default=DEFAULT_TX_POWER_W, gt=0, description="Uplink transmit power (W)")
    kappa_local: float = Field(default=DEFAULT_KAPPA_LOCAL, gt=0, description="Device capacitance")
    kappa_server: float = Field(default=DEFAULT_KAPPA_SERVER, ge=0, description="Server capacitance")
    drop_penalty: float | None = Field(
        default=None,
        lt=0,
        description="Reward for a dropped task; defaults to -(2 × latency_bound_s)",
    )
    normalize_costs: bool = Field(
        default=False,
        description="Weight latency/energy after dividing by the instance's mean local cost",
    )
    optimizer_queue_model: Literal["independent", "serialized"] = Field(
        default="independent",
        description="Whether tasks sent to the same server wait for each other inside one solve",
    )
    optimizer_node_limit: int = Field(
        default=DEFAULT_OPTIMIZER_NODE_LIMIT,
        ge=1,
        description="Search-node budget for the per-slot optimised policy",
    )


class RLParams(_Frozen):
    """Hyper-parameters of the tabular learners."""

    delta: float = Field(default=DEFAULT_LEARNING_RATE, description="Learning rate δ in (0,1]")
    beta: float = Field(default=DEFAULT_DISCOUNT, description="Discount β in [0,1)")
    epsilon: float = Field(default=DEFAULT_EXPLORATION, description="Exploration probability ε in [0,1]")
    episodes: int = Field(default=DEFAULT_EPISODES, ge=1)
    monte_carlo_runs: int = Field(default=DEFAULT_MONTE_CARLO_RUNS, ge=1)
    load_buckets: int = Field(default=DEFAULT_LOAD_BUCKETS, ge=2, description="Discretisation levels B")
    use_modified: bool = Field(default=True, description="Exploration-weighted update with reward retention")
    epsilon_decay: bool = Field(default=False, description="Linear decay of ε to epsilon_min over episodes")
    epsilon_min: float = Field(default=0.01, ge=0, le=1)
    eval_epsilon: float = Field(default=0.0, ge=0, le=1, description="ε while evaluating trained tables")
    eval_episodes: int = Field(default=DEFAULT_EVAL_EPISODES, ge=1, description="Greedy episodes scored per run")

    @field_validator("delta")
    @classmethod
    def _delta_range(cls, v: float) -> float:
        if not 0 < v <= 1:
            raise ValueError("delta out of (0,1]")
        return v

    @field_validator("beta")
    @classmethod
    def _beta_range(cls, v: float) -> float:
        if not 0 <= v < 1:
            raise ValueError("beta out of [0,1)")
        return v

    @field_validator("epsilon")
    @classmethod
    def _epsilon_range(cls, v: float) -> float:
        if not 0 <= v <= 1:
            raise ValueError("epsilon out of [0,1]")
        return v


class SweepParams(_Frozen):
    """Density sweep grid."""

    node_counts: list[int] = Field(default_factory=lambda: list(DEFAULT_NODE_COUNTS))
    policies: list[PolicyKind] = Field(default_factory=lambda: list(POLICY_ORDER))
    workers: int = Field(default=1, ge=1, description="Parallel sweep cells")

    @field_validator("node_counts")
    @classmethod
    def _ascending(cls, v: list[int]) -> list[int]:
        if not v:
            raise ValueError("node_counts must not be empty")
        if any(n < 1 or n > 10_000 for n in v):
            raise ValueError("node_counts entries must lie in [1, 10000]")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("node_counts must be strictly ascending")
        return v


# ---------------------------------------------------------------------------
# SystemConfig: the whole scenario
# ---------------------------------------------------------------------------

class SystemConfig(_Frozen):
    """Full scenario description.  Immutable; share freely across runs."""

    num_users: int = Field(default=DEFAULT_NUM_USERS, ge=1, le=10_000)
    num_servers: int = Field(default=DEFAULT_NUM_SERVERS, ge=1)
    tasks_per_user_max: int = Field(default=DEFAULT_TASKS_PER_USER_MAX, ge=1)
    arrival_rate_lambda: float = Field(default=DEFAULT_ARRIVAL_RATE, gt=0, description="Tasks/slot/user")
    link_rate_bps: float = Field(default=DEFAULT_LINK_RATE_BPS, gt=0)
    server_cpu_rate_hz: float = Field(default=DEFAULT_SERVER_CPU_HZ, gt=0, description="Fastest server")
    slowest_server_ratio: float = Field(
        default=DEFAULT_SLOWEST_SERVER_RATIO,
        gt=0,
        le=1,
        description="Server 1 rate as a fraction of server_cpu_rate_hz; servers in between are spaced linearly",
    )
    local_cpu_rate_hz: float = Field(default=DEFAULT_LOCAL_CPU_HZ, gt=0)
    latency_bound_s: float = Field(default=DEFAULT_LATENCY_BOUND_S, gt=0, description="QoS deadline")
    seed: int = Field(default=DEFAULT_SEED, ge=0, le=2**64 - 1)
    carrier_freq_hz: float = Field(default=DEFAULT_CARRIER_FREQ_HZ, gt=0, description="Metadata only")
    slot_duration_s: float = Field(default=DEFAULT_SLOT_DURATION_S, gt=0)
    slots_per_episode: int = Field(default=DEFAULT_SLOTS_PER_EPISODE, ge=1)
    data_size_bits: int = Field(default=DEFAULT_DATA_SIZE_BITS, gt=0)
    cycles_per_bit: int = Field(default=DEFAULT_CYCLES_PER_BIT, gt=0)
    local_queue_capacity: int = Field(default=DEFAULT_LOCAL_QUEUE_CAPACITY, ge=1)
    server_queue_limit: int = Field(default=DEFAULT_SERVER_QUEUE_LIMIT, ge=1)
    server_capacity_cycles: float = Field(default=DEFAULT_SERVER_CAPACITY_CYCLES, gt=0)
    server_cpu_rates_hz: list[float] | None = Field(default=None, description="Per-server override")
    link_rates_bps: list[float] | None = Field(default=None, description="Per-server uplink override")

    weights: Weights = Field(default_factory=Weights)
    costs: CostParams = Field(default_factory=CostParams)
    rl: RLParams = Field(default_factory=RLParams)
    sweep: SweepParams = Field(default_factory=SweepParams)

    @model_validator(mode="after")
    def _per_server_lists(self) -> SystemConfig:
        for name in ("server_cpu_rates_hz", "link_rates_bps"):
            values = getattr(self, name)
            if values is None:
                continue
            if len(values) != self.num_servers:
                raise ValueError(f"{name} must have num_servers={self.num_servers} entries")
            if any(v <= 0 for v in values):
                raise ValueError(f"{name} entries must be > 0")
        if self.data_size_bits * self.cycles_per_bit > INT64_MAX:
            raise ValueError("data_size_bits × cycles_per_bit overflows int64")
        return self

    # -- derived views -------------------------------------------------------

    @property
    def task_cycles(self) -> int:
        return self.data_size_bits * self.cycles_per_bit

    @property
    def drop_penalty_reward(self) -> float:
        if self.costs.drop_penalty is not None:
            return self.costs.drop_penalty
        return -2.0 * self.latency_bound_s

    @property
    def reward_bound(self) -> float:
        """R: magnitude used to clamp τ."""
        return abs(self.drop_penalty_reward)

    def server_rate(self, j: int) -> float:
        """CPU rate of server ``j`` (1-based)."""
        if self.server_cpu_rates_hz is not None:
            return self.server_cpu_rates_hz[j - 1]
        if self.num_servers == 1:
            return self.server_cpu_rate_hz
        lo = self.slowest_server_ratio
        return self.server_cpu_rate_hz * (lo + (1.0 - lo) * (j - 1) / (self.num_servers - 1))

    def link_rate(self, j: int) -> float:
        """Uplink rate towards server ``j`` (1-based)."""
        if self.link_rates_bps is not None:
            return self.link_rates_bps[j - 1]
        return self.link_rate_bps

    def user_nodes(self) -> list[UserNode]:
        return [
            UserNode(
                id=k,
                cpu_rate_hz=self.local_cpu_rate_hz,
                tx_power_w=self.costs.tx_power_w,
                local_queue_capacity=self.local_queue_capacity,
                kappa_local=self.costs.kappa_local,
            )
            for k in range(self.num_users)
        ]

    def edge_servers(self) -> list[EdgeServer]:
        return [
            EdgeServer(
                id=j,
                cpu_rate_hz=self.server_rate(j),
                capacity_cycles=self.server_capacity_cycles,
                queue_limit=self.server_queue_limit,
                kappa_server=self.costs.kappa_server,
            )
            for j in range(1, self.num_servers + 1)
        ]

    def link(self, user: int, server: int) -> Link:
        return Link(user=user, server=server, rate_bps=self.link_rate(server))

    def with_users(self, num_users: int) -> SystemConfig:
        return self.model_copy(update={"num_users": num_users})

    def with_rl(self, **changes: object) -> SystemConfig:
        return self.model_copy(update={"rl": self.rl.model_copy(update=changes)})

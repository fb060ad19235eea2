"""Scenario metrics: QoS score, reliability, and Monte Carlo aggregation.

Models
------
- **RunMetrics**   – one evaluation episode of one policy.
- **MetricsRow**   – mean and sample standard deviation over the Monte Carlo runs
                     of one (policy, num_users) cell.
- **MetricsReport** – the rows of a sweep, in deterministic order.

QoS is anchored on the all-local baseline of the same run::

    QoS = φ / (φ + w_a·T/T_ref + w_b·E/E_ref)

so the local-only policy scores φ/(2φ) = 0.5 and anything cheaper scores higher.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from shared.schemas import POLICY_ORDER, PolicyKind, Weights


def qos_score(avg_latency_s: float, avg_energy_j: float, w: Weights, refs: tuple[float, float]) -> float:
    t_ref, e_ref = refs
    if t_ref <= 0 or e_ref <= 0:
        raise ValueError(f"QoS references must be > 0, got {refs}")
    return w.phi / (w.phi + w.w_a * (avg_latency_s / t_ref) + w.w_b * (avg_energy_j / e_ref))


def reliability(completed: int, dropped: int) -> float:
    total = completed + dropped
    if total <= 0:
        raise ValueError("reliability needs at least one decided task")
    return completed / total


def mean_std(values: Sequence[float]) -> tuple[float, float]:
    """Mean and sample standard deviation (0 for a single value), NaNs skipped."""
    arr = np.asarray([v for v in values if not math.isnan(v)], dtype=float)
    if arr.size == 0:
        return math.nan, math.nan
    std = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    return float(np.mean(arr)), std


# ---------------------------------------------------------------------------
# Per-run and per-cell results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunMetrics:
    """Outcome of one evaluation episode; averages are over completed tasks."""

    completed: int
    dropped: int
    avg_latency_s: float
    avg_energy_j: float
    qos: float
    reliability: float

    def weighted_cost(self, w: Weights) -> float:
        return w.w_a * self.avg_latency_s + w.w_b * self.avg_energy_j


class MetricsRow(BaseModel):
    """Aggregated metrics of one (policy, num_users) cell."""

    model_config = ConfigDict(frozen=True)

    policy: PolicyKind = Field(..., description="Offloading scheme")
    num_users: int = Field(..., ge=1, description="Active nodes K")
    qos_mean: float
    qos_std: float
    rel_mean: float
    rel_std: float
    energy_mean: float = Field(..., description="Average energy per completed task (J)")
    energy_std: float
    latency_mean: float = Field(..., description="Average latency per completed task (s)")
    latency_std: float
    cost_mean: float = Field(default=math.nan, description="Weighted latency/energy cost")
    cost_std: float = math.nan
    completed_total: int = Field(default=0, ge=0, description="Completed tasks over all runs")
    dropped_total: int = Field(default=0, ge=0, description="Dropped tasks over all runs")

    @classmethod
    def from_runs(cls, policy: PolicyKind, num_users: int, runs: Sequence[RunMetrics], w: Weights) -> MetricsRow:
        qos = mean_std([r.qos for r in runs])
        rel = mean_std([r.reliability for r in runs])
        energy = mean_std([r.avg_energy_j for r in runs])
        latency = mean_std([r.avg_latency_s for r in runs])
        cost = mean_std([r.weighted_cost(w) for r in runs])
        return cls(
            policy=policy,
            num_users=num_users,
            qos_mean=qos[0],
            qos_std=qos[1],
            rel_mean=rel[0],
            rel_std=rel[1],
            energy_mean=energy[0],
            energy_std=energy[1],
            latency_mean=latency[0],
            latency_std=latency[1],
            cost_mean=cost[0],
            cost_std=cost[1],
            completed_total=sum(r.completed for r in runs),
            dropped_total=sum(r.dropped for r in runs),
        )

    def metric(self, figure: str) -> float:
        return {
            "qos": self.qos_mean,
            "reliability": self.rel_mean,
            "energy": self.energy_mean,
            "latency": self.latency_mean,
        }[figure]


class MetricsReport(BaseModel):
    """Rows of a sweep, ordered by num_users then canonical policy order."""

    rows: list[MetricsRow] = Field(default_factory=list)

    @classmethod
    def of(cls, rows: Iterable[MetricsRow]) -> MetricsReport:
        rank = {p: i for i, p in enumerate(POLICY_ORDER)}
        return cls(rows=sorted(rows, key=lambda r: (r.num_users, rank[r.policy])))

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def node_counts(self) -> list[int]:
        return sorted({r.num_users for r in self.rows})

    @property
    def policies(self) -> list[PolicyKind]:
        present = {r.policy for r in self.rows}
        return [p for p in POLICY_ORDER if p in present]

    def get(self, policy: PolicyKind, num_users: int) -> MetricsRow | None:
        for row in self.rows:
            if row.policy == policy and row.num_users == num_users:
                return row
        return None

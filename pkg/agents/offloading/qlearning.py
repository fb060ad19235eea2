"""Tabular Q-learning: the table, both update rules, and the reward plumbing.

Standard update::

    Q(s,a) ← Q(s,a) + δ·[r + β·max Q(s',·) − Q(s,a)]

Exploration-weighted update (the bootstrap term blends in τ)::

    Q(s,a) ← Q(s,a) + δ·[r + β·((1−ε)·max Q(s',·) + ε·τ) − Q(s,a)]

τ is a uniform fraction of the change from the previous reward.  When the
successor state repeats exactly, the previous reward is re-issued.  Drops
are never masked: a dropped task always feeds back the raw penalty.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from shared.errors import InvariantViolation

from .state import AgentState

logger = logging.getLogger("agents.offloading.qlearning")

QTABLE_COLUMNS: tuple[str, ...] = ("state_index", "action_index", "value")


# ---------------------------------------------------------------------------
# Q-table
# ---------------------------------------------------------------------------

@dataclass
class QTable:
    """Dense ``num_states × num_actions`` table of floats, zero-initialised."""

    values: np.ndarray

    @classmethod
    def zeros(cls, num_states: int, num_actions: int) -> QTable:
        if num_states < 1 or num_actions < 1:
            raise ValueError("a Q-table needs at least one state and one action")
        return cls(values=np.zeros((num_states, num_actions), dtype=np.float64))

    @property
    def num_states(self) -> int:
        return int(self.values.shape[0])

    @property
    def num_actions(self) -> int:
        return int(self.values.shape[1])

    def copy(self) -> QTable:
        return QTable(values=self.values.copy())

    def check_index(self, s: int, a: int | None = None) -> None:
        if not 0 <= s < self.num_states:
            raise IndexError(f"state {s} outside [0, {self.num_states})")
        if a is not None and not 0 <= a < self.num_actions:
            raise IndexError(f"action {a} outside [0, {self.num_actions})")

    def best_value(self, s: int) -> float:
        self.check_index(s)
        return float(np.max(self.values[s]))

    def _write(self, s: int, a: int, value: float) -> None:
        if not math.isfinite(value):
            raise InvariantViolation(f"Q({s},{a}) became {value}")
        self.values[s, a] = value


def q_update_standard(q: QTable, s: int, a: int, r: float, s_next: int, delta: float, beta: float) -> QTable:
    """Apply the standard update in place and return ``q``."""
    q.check_index(s, a)
    best_next = q.best_value(s_next)
    old = float(q.values[s, a])
    td = r + beta * best_next - old
    q._write(s, a, old + delta * td)
    return q


def q_update_modified(
    q: QTable,
    s: int,
    a: int,
    r: float,
    s_next: int,
    delta: float,
    beta: float,
    epsilon: float,
    tau: float,
) -> QTable:
    """Apply the exploration-weighted update in place and return ``q``.

    With ``epsilon == 0`` the result equals ``q_update_standard``.
    """
    if not math.isfinite(tau):
        raise ValueError(f"tau must be finite, got {tau}")
    q.check_index(s, a)
    best_next = q.best_value(s_next)
    old = float(q.values[s, a])
    blended = (1.0 - epsilon) * best_next + epsilon * tau
    td = r + beta * blended - old
    q._write(s, a, old + delta * td)
    return q


# ---------------------------------------------------------------------------
# Rewards
# ---------------------------------------------------------------------------

@dataclass
class AgentMemory:
    """Previous reward and successor state of one agent; cleared every episode."""

    prev_reward: float | None = None
    prev_state: AgentState | None = field(default=None)

    def clear(self) -> None:
        self.prev_reward = None
        self.prev_state = None


def sample_tau(r: float, memory: AgentMemory, rng: np.random.Generator) -> float:
    """τ = u·(r − previous reward), u ~ U[0,1); zero on an agent's first step."""
    if memory.prev_reward is None:
        return 0.0
    return float(rng.random()) * (r - memory.prev_reward)


def retained_reward(r: float, s: AgentState, memory: AgentMemory) -> float:
    """Re-issue the previous reward when ``s`` repeats the previous successor state."""
    out = r
    if memory.prev_reward is not None and memory.prev_state == s:
        out = memory.prev_reward
    memory.prev_reward = out
    memory.prev_state = s
    return out


def clamp(value: float, bound: float) -> float:
    return max(-bound, min(bound, value))


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------

def save_qtable_csv(q: QTable, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(QTABLE_COLUMNS)
        for s in range(q.num_states):
            for a in range(q.num_actions):
                writer.writerow([s, a, repr(float(q.values[s, a]))])
    return path


def load_qtable_csv(path: str | Path, num_states: int, num_actions: int) -> QTable:
    path = Path(path)
    q = QTable.zeros(num_states, num_actions)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != QTABLE_COLUMNS:
            raise ValueError(f"{path}: expected columns {QTABLE_COLUMNS}, got {reader.fieldnames}")
        for row in reader:
            s, a = int(row["state_index"]), int(row["action_index"])
            q.check_index(s, a)
            q._write(s, a, float(row["value"]))
    logger.info("Loaded Q-table %s (%d × %d)", path, num_states, num_actions)
    return q

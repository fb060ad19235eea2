"""Tests for Q-table updates, reward shaping, state encoding and action selection."""

from __future__ import annotations

from collections import Counter

import numpy as np
import pytest

from agents.offloading import (
    AgentMemory,
    AgentState,
    QTable,
    bucket,
    least_load_action,
    load_qtable_csv,
    num_states,
    observe,
    q_update_modified,
    q_update_standard,
    retained_reward,
    reward_from_time,
    sample_tau,
    save_qtable_csv,
    select_action,
    valid_binary_decisions,
    valid_decisions,
)
from agents.offloading.qlearning import clamp
from conftest import make_env, push_task
from shared.errors import InvariantViolation
from shared.schemas import SystemConfig
from simulator.environment import DeviceView, EnvSnapshot, ServerView


class _FixedDraw:
    """Stand-in generator whose uniform draw is always ``u``."""

    def __init__(self, u: float) -> None:
        self.u = u

    def random(self) -> float:
        return self.u


def _table_with_next(best_next: float) -> QTable:
    q = QTable.zeros(2, 2)
    q.values[1] = [best_next, best_next - 3.0]
    return q


# ---------------------------------------------------------------------------
# Update rules
# ---------------------------------------------------------------------------

def test_standard_update_worked_example():
    q = q_update_standard(_table_with_next(-2.0), 0, 0, -5.0, 1, 0.5, 0.9)
    assert q.values[0, 0] == pytest.approx(-3.4, abs=1e-12)
    assert q.values[0, 1] == 0.0
    assert q.values[1].tolist() == [-2.0, -5.0]


def test_myopic_full_overwrite():
    q = q_update_standard(_table_with_next(-2.0), 0, 1, -7.25, 1, 1.0, 0.0)
    assert q.values[0, 1] == -7.25


def test_modified_update_ignores_max_at_full_exploration():
    q = q_update_modified(_table_with_next(-100.0), 0, 0, -5.0, 1, 1.0, 0.5, 1.0, 2.0)
    assert q.values[0, 0] == -4.0


def test_modified_reduces_to_standard_without_exploration():
    rng = np.random.default_rng(123)
    for _ in range(100_000):
        values = rng.uniform(-50, 50, size=(3, 2))
        s, s_next, a = int(rng.integers(3)), int(rng.integers(3)), int(rng.integers(2))
        r = float(rng.uniform(-400, 0))
        delta = float(rng.uniform(1e-3, 1.0))
        beta = float(rng.uniform(0.0, 0.999))
        tau = float(rng.uniform(-400, 400))
        std = q_update_standard(QTable(values.copy()), s, a, r, s_next, delta, beta)
        mod = q_update_modified(QTable(values.copy()), s, a, r, s_next, delta, beta, 0.0, tau)
        assert std.values[s, a] == mod.values[s, a]


def test_fixed_point_leaves_table_unchanged():
    q = _table_with_next(-2.0)
    q.values[0, 0] = -3.4
    before = q.values.copy()
    q_update_standard(q, 0, 0, -3.4, 1, 0.3, 0.0)
    assert np.array_equal(q.values, before)
    q_update_modified(q, 0, 0, -3.4, 1, 0.3, 0.5, 0.5, 2.0)
    assert np.array_equal(q.values, before)


def test_update_index_and_value_errors():
    q = QTable.zeros(2, 2)
    with pytest.raises(IndexError):
        q_update_standard(q, 2, 0, -1.0, 0, 0.5, 0.5)
    with pytest.raises(IndexError):
        q_update_standard(q, 0, 2, -1.0, 0, 0.5, 0.5)
    with pytest.raises(IndexError):
        q_update_standard(q, 0, 0, -1.0, 5, 0.5, 0.5)
    with pytest.raises(ValueError):
        q_update_modified(q, 0, 0, -1.0, 1, 0.5, 0.5, 0.1, float("nan"))
    with pytest.raises(InvariantViolation):
        q_update_standard(q, 0, 0, float("inf"), 1, 0.5, 0.5)
    with pytest.raises(ValueError):
        QTable.zeros(0, 2)


# ---------------------------------------------------------------------------
# Rewards
# ---------------------------------------------------------------------------

def test_reward_is_negated_time():
    assert reward_from_time(101.0) == -101.0
    assert reward_from_time(10.0) == -10.0
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            reward_from_time(bad)


def test_sample_tau():
    memory = AgentMemory()
    assert sample_tau(-5.0, memory, _FixedDraw(0.5)) == 0.0
    memory.prev_reward = -10.0
    assert sample_tau(-5.0, memory, _FixedDraw(0.5)) == 2.5
    assert sample_tau(-10.0, memory, _FixedDraw(0.9)) == 0.0


def test_retained_reward():
    s = AgentState(1, (0, 2))
    other = AgentState(0, (0, 2))
    memory = AgentMemory()
    assert retained_reward(-6.0, s, memory) == -6.0
    assert (memory.prev_reward, memory.prev_state) == (-6.0, s)

    memory.prev_reward = -8.0
    assert retained_reward(-6.0, s, memory) == -8.0
    assert retained_reward(-1.0, s, memory) == -8.0
    assert retained_reward(-6.0, other, memory) == -6.0

    memory.clear()
    assert memory.prev_reward is None and memory.prev_state is None


def test_clamp():
    assert clamp(500.0, 400.0) == 400.0
    assert clamp(-500.0, 400.0) == -400.0
    assert clamp(3.0, 400.0) == 3.0


# ---------------------------------------------------------------------------
# State
# ---------------------------------------------------------------------------

def test_bucket_edges():
    assert [bucket(f, 4) for f in (0.0, 0.24, 0.25, 0.5, 0.74, 0.75, 1.0, 1.5)] == [0, 0, 1, 2, 2, 3, 3, 3]


def test_state_encoding():
    st = AgentState(1, (2, 3))
    assert st.encode(4) == 1 + 2 * 4 + 3 * 16
    assert AgentState.decode(57, 4, 2) == st
    assert num_states(4, 2) == 64
    assert {AgentState.decode(i, 3, 2).encode(3) for i in range(num_states(3, 2))} == set(range(27))
    with pytest.raises(ValueError):
        AgentState(4, (0, 0)).encode(4)
    with pytest.raises(ValueError):
        AgentState.decode(64, 4, 2)


def test_observe_reads_own_queue_and_server_load(worked_config):
    env = make_env(worked_config.with_users(2))
    push_task(env, 0)
    push_task(env, 1)
    env.step([0, 1])
    assert observe(env.state, 0, 4) == AgentState(2, (0,) * 5)
    assert observe(env.snapshot(), 1, 4) == AgentState(0, (0,) * 5)


# ---------------------------------------------------------------------------
# Decisions
# ---------------------------------------------------------------------------

def _snapshot(config: SystemConfig, queued: list[tuple[float, int]]) -> EnvSnapshot:
    servers = tuple(
        ServerView(server=s, queued_cycles=c, queued_tasks=n) for s, (c, n) in zip(config.edge_servers(), queued)
    )
    node = config.user_nodes()[0]
    return EnvSnapshot(slot=0, servers=servers, devices=(DeviceView(node=node, queued_tasks=0, head=None),))


def test_valid_decisions(worked_config):
    cfg = worked_config.model_copy(update={"num_servers": 3})
    assert valid_decisions(0, _snapshot(cfg, [(0.0, 0)] * 3), cfg) == {0, 1, 2, 3}
    limited = _snapshot(cfg, [(0.0, 0), (1e10, 10), (0.0, 0)])
    assert valid_decisions(0, limited, cfg) == {0, 1, 3}
    full = _snapshot(cfg, [(1e11, 10)] * 3)
    assert valid_decisions(0, full, cfg) == {0}
    assert valid_binary_decisions(0, full, cfg) == {0}
    assert valid_binary_decisions(0, limited, cfg) == {0, 1}
    no_room = _snapshot(cfg, [(9.5e10, 1)] * 3)
    assert valid_decisions(0, no_room, cfg) == {0}


def test_least_load_action(worked_config):
    cfg = worked_config.model_copy(update={"num_servers": 3})
    assert least_load_action(_snapshot(cfg, [(3.0, 1), (1.0, 1), (2.0, 1)]), True) == 2
    assert least_load_action(_snapshot(cfg, [(0.0, 0)] * 3), True) == 1
    assert least_load_action(_snapshot(cfg, [(3.0, 1), (1.0, 1), (2.0, 1)]), False) == 0


def test_greedy_selection():
    q = QTable.zeros(1, 4)
    rng = np.random.default_rng(0)
    assert select_action(q, 0, {1, 2, 3}, 0.0, rng) == 1
    q.values[0] = [9.0, 0.0, 1.0, 5.0]
    assert select_action(q, 0, {1, 2, 3}, 0.0, rng) == 3
    with pytest.raises(ValueError):
        select_action(q, 0, set(), 0.0, rng)


def test_full_exploration_is_uniform():
    q = QTable.zeros(1, 3)
    q.values[0] = [0.0, 100.0, -5.0]
    rng = np.random.default_rng(17)
    counts = Counter(select_action(q, 0, {0, 1, 2}, 1.0, rng) for _ in range(10_000))
    for a in (0, 1, 2):
        assert abs(counts[a] - 3333) <= 200


def test_selection_stays_within_valid_set():
    q = QTable.zeros(1, 3)
    q.values[0] = [0.0, 100.0, -5.0]
    rng = np.random.default_rng(4)
    picks = {select_action(q, 0, {0, 2}, 0.5, rng) for _ in range(2_000)}
    assert picks == {0, 2}


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------

def test_qtable_csv_round_trip(tmp_path):
    q = QTable(np.random.default_rng(2).uniform(-10, 0, size=(4, 3)))
    path = save_qtable_csv(q, tmp_path / "q.csv")
    assert np.array_equal(load_qtable_csv(path, 4, 3).values, q.values)
    with pytest.raises(IndexError):
        load_qtable_csv(path, 2, 3)

"""Tests for the branch-and-bound optimiser and the exhaustive oracle."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import make_env, push_task
from optimizer import (
    ENERGY_ONLY,
    OffloadInstance,
    brute_force_oracle,
    instance_from_snapshot,
    instance_from_tasks,
    load_instance_csv,
    lower_bound,
    objective,
    random_instance,
    save_instance_csv,
    solve_energy_min,
    solve_weighted,
    violations,
)
from shared.errors import InfeasibleError, InstanceTooLargeError
from shared.rng import StreamPurpose, seeded_rng
from shared.schemas import SystemConfig, Task, Weights


def _tasks(config: SystemConfig, n: int) -> list[Task]:
    return [
        Task(id=i, owner=i % config.num_users, data_size_bits=config.data_size_bits, cycles_per_bit=config.cycles_per_bit)
        for i in range(n)
    ]


def _instances(count: int, *, serialized: bool = False):
    for i in range(count):
        rng = seeded_rng(7, 0, i, StreamPurpose.INSTANCES)
        n = int(rng.integers(1, 6))
        m = int(rng.integers(1, 4))
        inst = random_instance(rng, n, m)
        yield inst.with_queue_model("serialized") if serialized else inst


def _outcome(fn, *args):
    try:
        sol = fn(*args)
    except InfeasibleError:
        return "infeasible"
    return sol.assignment.venues, sol.objective


# ---------------------------------------------------------------------------
# Worked examples
# ---------------------------------------------------------------------------

def test_single_task_stays_local(ten_joule_config):
    inst = instance_from_tasks(_tasks(ten_joule_config, 1), ten_joule_config)
    sol = solve_weighted(inst, ten_joule_config.weights)
    assert sol.assignment.venues == (0,)
    assert sol.objective == pytest.approx(100.0)
    assert sol.total_latency_s == 10.0
    assert sol.optimal


def test_energy_weight_moves_task_to_server(worked_config):
    inst = instance_from_tasks(_tasks(worked_config, 1), worked_config)
    sol = solve_weighted(inst, Weights(w_a=0, w_b=10, phi=10))
    assert sol.assignment.venues == (1,)
    assert sol.objective == pytest.approx(500.01)


def test_equal_servers_fill_lowest_index_first(worked_config):
    inst = instance_from_tasks(_tasks(worked_config, 12), worked_config)
    sol = solve_weighted(inst, Weights(w_a=0, w_b=10, phi=10))
    assert sol.assignment.venues == (1,) * 10 + (2, 2)


def test_no_tasks_gives_empty_solution(worked_config):
    inst = instance_from_tasks([], worked_config)
    sol = solve_weighted(inst, worked_config.weights)
    assert sol.assignment.venues == ()
    assert sol.objective == 0.0


def test_energy_min_respects_bound(worked_config):
    inst = instance_from_tasks(_tasks(worked_config, 1), worked_config)
    loose = solve_energy_min(inst, 200.0)
    assert loose.assignment.venues == (1,)
    assert loose.total_energy_j == pytest.approx(50.001)
    tight = solve_energy_min(inst, 50.0)
    assert tight.assignment.venues == (0,)
    assert tight.total_energy_j == pytest.approx(100.0)
    with pytest.raises(InfeasibleError) as info:
        solve_energy_min(inst, 5.0)
    assert info.value.task_ids == [0]
    with pytest.raises(ValueError):
        solve_energy_min(inst, 0.0)


def test_lower_bound_worked_example(ten_joule_config):
    inst = instance_from_tasks(_tasks(ten_joule_config, 1), ten_joule_config)
    w = ten_joule_config.weights
    assert lower_bound([], inst, w) == pytest.approx(100.0)
    assert lower_bound([1], inst, w) == pytest.approx(755.005)


# ---------------------------------------------------------------------------
# Certification against the oracle
# ---------------------------------------------------------------------------

def test_matches_oracle_independent_queues():
    w = Weights(w_a=3, w_b=7, phi=10)
    for inst in _instances(200):
        assert _outcome(solve_weighted, inst, w) == _outcome(brute_force_oracle, inst, w)


def test_matches_oracle_serialized_queues():
    w = Weights(w_a=6, w_b=4, phi=10)
    for inst in _instances(100, serialized=True):
        assert _outcome(solve_weighted, inst, w) == _outcome(brute_force_oracle, inst, w)


@pytest.mark.parametrize("bound", [20.0, 50.0, 80.0])
def test_energy_min_matches_oracle(bound):
    for inst in _instances(80):
        assert _outcome(solve_energy_min, inst, bound) == _outcome(brute_force_oracle, inst, ENERGY_ONLY, bound)


@pytest.mark.parametrize("w", [Weights(w_a=1, w_b=0, phi=1), Weights(w_a=0, w_b=1, phi=1)])
def test_extreme_weights_match_oracle(w):
    for inst in _instances(50):
        assert _outcome(solve_weighted, inst, w) == _outcome(brute_force_oracle, inst, w)


def test_lower_bound_is_admissible():
    w = Weights(w_a=5, w_b=5, phi=10)
    for inst in _instances(50):
        sol = solve_weighted(inst, w)
        venues = sol.assignment.venues
        for depth in range(len(venues) + 1):
            assert lower_bound(venues[:depth], inst, w) <= sol.objective + 1e-9


def test_scaled_weights_scale_objective():
    w = Weights(w_a=2, w_b=3, phi=5)
    for inst in _instances(50):
        base = solve_weighted(inst, w)
        scaled = solve_weighted(inst, w.scaled(3))
        assert scaled.assignment == base.assignment
        assert scaled.objective == 3 * base.objective


def test_solutions_are_feasible_and_consistent():
    w = Weights(w_a=5, w_b=5, phi=10)
    for inst in _instances(50, serialized=True):
        sol = solve_weighted(inst, w)
        assert violations(inst, sol.assignment.venues) == []
        assert sol.consistent_with(inst, w)
        assert sol.objective == objective(inst, w, sol.assignment.venues)


def test_node_limit_returns_incumbent():
    inst = random_instance(np.random.default_rng(5), 5, 2, tight=False)
    w = Weights(w_a=5, w_b=5, phi=10)
    sol = solve_weighted(inst, w, node_limit=1)
    assert not sol.optimal
    assert violations(inst, sol.assignment.venues) == []
    assert sol.objective >= solve_weighted(inst, w).objective


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

def _must_offload(capacity: float) -> OffloadInstance:
    return OffloadInstance(
        task_ids=(0,),
        latency=np.array([[1.0, 2.0]]),
        energy=np.array([[1.0, 2.0]]),
        cycles=np.array([4.0]),
        capacity_cycles=np.array([capacity]),
        server_rates=np.array([1.0]),
        local_allowed=(False,),
    )


def test_blocked_offload_is_infeasible():
    w = Weights()
    with pytest.raises(InfeasibleError) as info:
        solve_weighted(_must_offload(0.0), w)
    assert info.value.task_ids == [0]
    with pytest.raises(InfeasibleError):
        brute_force_oracle(_must_offload(0.0), w)
    assert solve_weighted(_must_offload(4.0), w).assignment.venues == (1,)


def test_oracle_refuses_large_instances():
    inst = random_instance(np.random.default_rng(0), 7, 7)
    with pytest.raises(InstanceTooLargeError):
        brute_force_oracle(inst, Weights())


def test_instance_shapes_validated():
    with pytest.raises(ValueError):
        OffloadInstance(
            task_ids=(0,),
            latency=np.ones((1, 3)),
            energy=np.ones((1, 2)),
            cycles=np.ones(1),
            capacity_cycles=np.ones(1),
            server_rates=np.ones(1),
        )
    with pytest.raises(ValueError, match="positive"):
        OffloadInstance(
            task_ids=(0,),
            latency=np.array([[0.0, 1.0]]),
            energy=np.ones((1, 2)),
            cycles=np.ones(1),
            capacity_cycles=np.ones(1),
            server_rates=np.ones(1),
        )


# ---------------------------------------------------------------------------
# Builders and fixtures
# ---------------------------------------------------------------------------

def test_full_device_pays_penalty_locally(worked_config):
    env = make_env(worked_config.with_users(1))
    for _ in range(2):
        push_task(env, 0)
        env.step([0])
    push_task(env, 0)
    inst, users = instance_from_snapshot(env.snapshot(), worked_config)
    assert users == [0]
    assert inst.latency[0, 0] == 400.0
    assert inst.latency[0, 1] == pytest.approx(101.0)
    assert inst.server_slots == (10,) * 5


def test_snapshot_backlog_adds_wait_and_cuts_capacity(worked_config):
    env = make_env(worked_config.with_users(3))
    for k in range(3):
        push_task(env, k)
    env.step([1, 1, 0])
    push_task(env, 2)
    inst, users = instance_from_snapshot(env.snapshot(), worked_config)
    assert users == [2]
    assert inst.latency[0, 1] == pytest.approx(102.0)
    assert inst.capacity_cycles[0] == 9e10
    assert inst.server_slots[0] == 9


def test_normalized_costs(worked_config):
    cfg = worked_config.model_copy(update={"costs": worked_config.costs.model_copy(update={"normalize_costs": True})})
    inst = instance_from_tasks(_tasks(cfg, 2), cfg)
    assert inst.latency_scale == 10.0
    assert inst.energy_scale == pytest.approx(100.0)
    assert objective(inst, cfg.weights, (0, 0)) == pytest.approx(20.0)


def test_instance_csv_round_trip(tmp_path):
    inst = random_instance(np.random.default_rng(11), 4, 2)
    path = save_instance_csv(inst, tmp_path / "inst.csv")
    back = load_instance_csv(path, capacity_cycles=inst.capacity_cycles, server_rates=inst.server_rates)
    assert back.task_ids == inst.task_ids
    assert np.array_equal(back.latency, inst.latency)
    assert np.array_equal(back.energy, inst.energy)
    assert np.array_equal(back.cycles, inst.cycles)
    w = Weights()
    assert solve_weighted(back, w).assignment == solve_weighted(inst, w).assignment


def test_instance_csv_rejects_missing_venues(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("task_id,venue_id,latency_s,energy_j,cycles\n0,0,1.0,1.0,1.0\n")
    with pytest.raises(ValueError, match="venues"):
        load_instance_csv(path, capacity_cycles=[1.0])

"""Shared pytest fixtures for the offloading toolkit tests."""

from __future__ import annotations

import pytest

from shared.rng import seeded_rng
from shared.schemas import CostParams, RLParams, SystemConfig, Task
from simulator.environment import MecEnvironment


@pytest.fixture
def default_config() -> SystemConfig:
    return SystemConfig()


@pytest.fixture
def small_config() -> SystemConfig:
    """A few users over two servers, short episodes, two Monte Carlo runs."""
    return SystemConfig(
        num_users=4,
        num_servers=2,
        slots_per_episode=10,
        rl=RLParams(episodes=3, monte_carlo_runs=2),
    )


WORKED_VALUES = dict(
    local_cpu_rate_hz=1e9,
    local_queue_capacity=2,
    slowest_server_ratio=1.0,
    costs=CostParams(tx_power_w=0.5, kappa_local=1e-26, kappa_server=1e-33),
)


@pytest.fixture
def worked_config() -> SystemConfig:
    """Five identical 10 GHz servers, a 1 GHz device holding two tasks, 0.5 W uplink.

    A local task costs 10 s and 100 J; an offload to an idle server 101 s and 50.001 J.
    """
    return SystemConfig(**WORKED_VALUES)


@pytest.fixture
def ten_joule_config(worked_config) -> SystemConfig:
    """Worked values with κ_local lowered so a local task costs 10 s and 10 J."""
    return worked_config.model_copy(update={"costs": worked_config.costs.model_copy(update={"kappa_local": 1e-27})})


def make_env(config: SystemConfig, *, seed_stream: int = 0, **kwargs) -> MecEnvironment:
    return MecEnvironment(config, seeded_rng(config.seed, config.num_users, seed_stream), **kwargs)


def push_task(env: MecEnvironment, user: int) -> Task:
    """Queue one default-sized task for ``user`` without drawing arrivals."""
    st = env.state
    task = Task(
        id=st.next_task_id,
        owner=user,
        data_size_bits=env.config.data_size_bits,
        cycles_per_bit=env.config.cycles_per_bit,
        arrival_slot=st.slot,
    )
    st.next_task_id += 1
    st.generated += 1
    st.devices[user].pending.append(task)
    return task

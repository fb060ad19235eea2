"""Valid-decision filtering and ε-greedy action selection."""

from __future__ import annotations

from typing import AbstractSet

import numpy as np

from shared.schemas import SystemConfig
from simulator.environment import EnvSnapshot, EnvState, least_loaded_server

from .qlearning import QTable

# Binary action space of the least-load learner.
ACTION_LOCAL = 0
ACTION_OFFLOAD = 1


def _head_cycles(user: int, state: EnvState | EnvSnapshot, config: SystemConfig) -> float:
    head = state.devices[user].head
    return float(head.total_cycles if head is not None else config.task_cycles)


def valid_decisions(user: int, state: EnvState | EnvSnapshot, config: SystemConfig) -> frozenset[int]:
    """Local always; server j when it could admit the user's head task right now."""
    cycles = _head_cycles(user, state, config)
    servers = {j for j, s in enumerate(state.servers, start=1) if s.can_admit(cycles)}
    return frozenset({0} | servers)


def valid_binary_decisions(user: int, state: EnvState | EnvSnapshot, config: SystemConfig) -> frozenset[int]:
    """{local} plus {offload} when at least one server could take the head task."""
    if len(valid_decisions(user, state, config)) > 1:
        return frozenset({ACTION_LOCAL, ACTION_OFFLOAD})
    return frozenset({ACTION_LOCAL})


def select_action(
    q: QTable,
    s: int,
    valid: AbstractSet[int],
    epsilon: float,
    rng: np.random.Generator,
) -> int:
    """ε-greedy over ``valid``; greedy ties go to the lowest action index.

    One uniform draw decides explore/exploit on every call.
    """
    if not valid:
        raise ValueError("no valid action to choose from")
    options = sorted(valid)
    q.check_index(s)
    if float(rng.random()) < epsilon:
        return options[int(rng.integers(len(options)))]
    row = q.values[s]
    best = options[0]
    for a in options[1:]:
        if row[a] > row[best]:
            best = a
    return best


def least_load_action(state: EnvState | EnvSnapshot, offload_flag: bool) -> int:
    """Venue of the least-loaded server when offloading, else 0 (local)."""
    return least_loaded_server(state) if offload_flag else 0

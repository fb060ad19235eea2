"""The four offloading schemes as decision functions over an environment snapshot.

A policy only sees the read-only ``EnvSnapshot`` and returns one action per
user; the harness hands those actions to ``MecEnvironment.step``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Protocol

from agents.offloading import ActionMode, OffloadingAgents
from optimizer import instance_from_snapshot, solve_weighted
from shared.schemas import PolicyKind, SystemConfig, Weights
from simulator.environment import EnvSnapshot

logger = logging.getLogger("bench.policies")

LEARNED_MODES: dict[PolicyKind, ActionMode] = {
    PolicyKind.RL_OFFLOAD: ActionMode.VENUE,
    PolicyKind.RL_LEAST_LOAD: ActionMode.BINARY,
}


class Policy(Protocol):
    kind: PolicyKind

    def decide(self, snapshot: EnvSnapshot) -> list[int]: ...


@dataclass
class LocalOnlyPolicy:
    kind: PolicyKind = PolicyKind.LOCAL_ONLY

    def decide(self, snapshot: EnvSnapshot) -> list[int]:
        return [0] * len(snapshot.devices)


@dataclass
class OptimizedPolicy:
    """Solves the weighted assignment over this slot's head tasks."""

    config: SystemConfig
    weights: Weights
    kind: PolicyKind = PolicyKind.OPTIMIZED
    suboptimal_solves: int = field(default=0, init=False)

    def decide(self, snapshot: EnvSnapshot) -> list[int]:
        actions = [0] * len(snapshot.devices)
        inst, users = instance_from_snapshot(snapshot, self.config)
        if not users:
            return actions
        sol = solve_weighted(inst, self.weights, node_limit=self.config.costs.optimizer_node_limit)
        if not sol.optimal:
            self.suboptimal_solves += 1
        for row, user in enumerate(users):
            actions[user] = sol.assignment[row]
        return actions


@dataclass
class LearnedPolicy:
    """Trained Q-tables acting with a fixed evaluation ε."""

    agents: OffloadingAgents
    epsilon: float
    kind: PolicyKind = PolicyKind.RL_OFFLOAD

    def decide(self, snapshot: EnvSnapshot) -> list[int]:
        actions, _ = self.agents.choose(snapshot, self.epsilon)
        return actions


def requires_training(kind: PolicyKind) -> bool:
    return kind in LEARNED_MODES

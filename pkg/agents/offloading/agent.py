"""Multi-agent training loop: one independent Q-learner per user.

Per slot every user with a pending task observes its discretised state,
filters its valid decisions, picks one ε-greedily, and after the shared
environment step feeds its reward into its own table.  Agents interact
only through the environment.

Two action spaces:

- ``VENUE``   choose the venue directly (0..M).
- ``BINARY``  choose local/offload; offloads go to the least-loaded server,
              with earlier offloads of the same slot counted as queued load.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from shared.rng import StreamPurpose, seeded_rng
from shared.schemas import SystemConfig
from simulator.environment import EnvSnapshot, MecEnvironment

from .decisions import ACTION_OFFLOAD, least_load_action, select_action, valid_binary_decisions, valid_decisions
from .qlearning import (
    AgentMemory,
    QTable,
    clamp,
    q_update_modified,
    q_update_standard,
    retained_reward,
    sample_tau,
)
from .state import AgentState, num_states, observe

logger = logging.getLogger("agents.offloading.agent")


class ActionMode(str, Enum):
    VENUE = "venue"
    BINARY = "binary"


def num_actions(config: SystemConfig, mode: ActionMode) -> int:
    return config.num_servers + 1 if mode is ActionMode.VENUE else 2


def epsilon_at(config: SystemConfig, episode: int, episodes: int) -> float:
    """Exploration rate of ``episode``; linear from ε to ε_min when decay is on."""
    rl = config.rl
    if not rl.epsilon_decay or episodes <= 1:
        return rl.epsilon
    frac = episode / (episodes - 1)
    return rl.epsilon + (rl.epsilon_min - rl.epsilon) * frac


def agent_rngs(config: SystemConfig, run: int) -> list[np.random.Generator]:
    return [
        seeded_rng(config.seed, config.num_users, run, StreamPurpose.AGENTS, k)
        for k in range(config.num_users)
    ]


# ---------------------------------------------------------------------------
# Acting
# ---------------------------------------------------------------------------

@dataclass
class OffloadingAgents:
    """The K learners of one run, plus the per-episode memories."""

    config: SystemConfig
    mode: ActionMode
    tables: list[QTable]
    rngs: list[np.random.Generator]
    memories: list[AgentMemory] = field(default_factory=list)

    @classmethod
    def fresh(cls, config: SystemConfig, mode: ActionMode, rngs: Sequence[np.random.Generator]) -> OffloadingAgents:
        s = num_states(config.rl.load_buckets, config.num_servers)
        a = num_actions(config, mode)
        return cls(
            config=config,
            mode=mode,
            tables=[QTable.zeros(s, a) for _ in range(config.num_users)],
            rngs=list(rngs),
            memories=[AgentMemory() for _ in range(config.num_users)],
        )

    def start_episode(self) -> None:
        for mem in self.memories:
            mem.clear()

    def observe(self, snapshot: EnvSnapshot, user: int) -> AgentState:
        return observe(snapshot, user, self.config.rl.load_buckets)

    def choose(self, snapshot: EnvSnapshot, epsilon: float) -> tuple[list[int], dict[int, tuple[AgentState, int]]]:
        """Env actions for every user, plus (state, table action) of each acting user.

        Binary offloads are routed in user order against a projection of the
        snapshot that already holds the earlier offloads of this slot.
        """
        cfg = self.config
        actions = [0] * cfg.num_users
        taken: dict[int, tuple[AgentState, int]] = {}
        projected = snapshot
        for k, dev in enumerate(snapshot.devices):
            if dev.head is None:
                continue
            state = self.observe(snapshot, k)
            if self.mode is ActionMode.VENUE:
                valid = valid_decisions(k, snapshot, cfg)
            else:
                valid = valid_binary_decisions(k, projected, cfg)
            a = select_action(self.tables[k], state.encode(cfg.rl.load_buckets), valid, epsilon, self.rngs[k])
            taken[k] = (state, a)
            if self.mode is ActionMode.BINARY:
                venue = least_load_action(projected, a == ACTION_OFFLOAD)
                if venue:
                    projected = projected.with_admission(venue, dev.head.total_cycles)
                actions[k] = venue
            else:
                actions[k] = a
        return actions, taken

    def learn(
        self,
        taken: dict[int, tuple[AgentState, int]],
        rewards: Sequence[float | None],
        dropped: Sequence[bool],
        snapshot_next: EnvSnapshot,
        epsilon: float,
    ) -> None:
        """Update every acting user's table.  A drop feeds back the raw penalty and leaves the memory alone."""
        rl = self.config.rl
        b = rl.load_buckets
        bound = self.config.reward_bound
        for k, (state, a) in taken.items():
            r = rewards[k]
            if r is None:
                continue
            s_next = self.observe(snapshot_next, k)
            q = self.tables[k]
            if rl.use_modified:
                mem = self.memories[k]
                tau = clamp(sample_tau(r, mem, self.rngs[k]), bound)
                r_used = r if dropped[k] else retained_reward(r, s_next, mem)
                q_update_modified(q, state.encode(b), a, r_used, s_next.encode(b), rl.delta, rl.beta, epsilon, tau)
            else:
                q_update_standard(q, state.encode(b), a, r, s_next.encode(b), rl.delta, rl.beta)

    def policy(self, epsilon: float) -> Callable[[EnvSnapshot], list[int]]:
        """Frozen-table decision function for evaluation episodes."""

        def decide(snapshot: EnvSnapshot) -> list[int]:
            return self.choose(snapshot, epsilon)[0]

        return decide


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

@dataclass
class TrainingResult:
    """Final tables of the last run and the per-episode average reward.

    ``reward_series[e]`` averages ``run_series[r][e]`` over runs.
    """

    tables: list[QTable]
    reward_series: list[float]
    run_series: list[list[float]]
    mode: ActionMode

    @property
    def max_abs_q(self) -> float:
        return max((float(np.max(np.abs(t.values))) for t in self.tables), default=0.0)


def run_episode(env: MecEnvironment, agents: OffloadingAgents, epsilon: float, *, learn: bool = True) -> float:
    """Play one episode; return the mean over acting agents of their mean reward per step."""
    env.reset()
    agents.start_episode()
    k_users = env.num_users
    sums = [0.0] * k_users
    counts = [0] * k_users
    for _ in range(env.config.slots_per_episode):
        env.begin_slot()
        actions, taken = agents.choose(env.snapshot(), epsilon)
        result = env.step(actions)
        if learn:
            agents.learn(taken, result.rewards, result.dropped, env.snapshot(), epsilon)
        for k in taken:
            r = result.rewards[k]
            if r is not None:
                sums[k] += r
                counts[k] += 1
    per_agent = [s / c for s, c in zip(sums, counts) if c]
    return float(np.mean(per_agent)) if per_agent else 0.0


def train_run(
    env: MecEnvironment,
    config: SystemConfig,
    rngs: Sequence[np.random.Generator],
    *,
    mode: ActionMode = ActionMode.VENUE,
    episodes: int | None = None,
) -> tuple[OffloadingAgents, list[float]]:
    """One independent training run on ``env``."""
    n_episodes = config.rl.episodes if episodes is None else episodes
    agents = OffloadingAgents.fresh(config, mode, rngs)
    series = [run_episode(env, agents, epsilon_at(config, e, n_episodes)) for e in range(n_episodes)]
    return agents, series


def train(
    env_factory: Callable[[int], MecEnvironment],
    config: SystemConfig,
    *,
    mode: ActionMode = ActionMode.VENUE,
    runs: int | None = None,
    episodes: int | None = None,
) -> TrainingResult:
    """Train ``runs`` independent runs; ``env_factory(run)`` builds each run's environment."""
    n_runs = config.rl.monte_carlo_runs if runs is None else runs
    n_episodes = config.rl.episodes if episodes is None else episodes
    logger.info(
        "Training %s learners: %d users, %d runs × %d episodes (modified=%s)",
        mode.value,
        config.num_users,
        n_runs,
        n_episodes,
        config.rl.use_modified,
    )
    run_series: list[list[float]] = []
    tables: list[QTable] = []
    for run in range(n_runs):
        agents, series = train_run(env_factory(run), config, agent_rngs(config, run), mode=mode, episodes=n_episodes)
        run_series.append(series)
        tables = agents.tables
    if not tables:
        tables = OffloadingAgents.fresh(config, mode, []).tables
    reward_series = [float(np.mean(col)) for col in zip(*run_series)] if n_episodes else []
    logger.info("Training done: final episode reward %s", reward_series[-1] if reward_series else "n/a")
    return TrainingResult(tables=tables, reward_series=reward_series, run_series=run_series, mode=mode)

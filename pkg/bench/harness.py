"""Monte Carlo experiment harness.

For every run ``r`` of a (policy, num_users) cell:

1. learned policies train on the run's TRAIN_ARRIVALS stream;
2. the policy plays ``eval_episodes`` greedy episodes back to back on the
   EVAL_ARRIVALS stream, pooled into one set of metrics;
3. the local-only baseline replays the same evaluation stream for the QoS anchors.

Stream keys never include the policy, so every policy faces identical
arrivals and adding or removing policies leaves the other cells untouched.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from agents.offloading import train_run
from agents.offloading.agent import agent_rngs
from shared.records import TraceRecord
from shared.rng import StreamPurpose, seeded_rng
from shared.schemas import POLICY_ORDER, PolicyKind, SystemConfig, Task
from simulator.costs import local_cost
from simulator.environment import MecEnvironment

from .metrics import MetricsReport, MetricsRow, RunMetrics, qos_score, reliability
from .policies import LEARNED_MODES, LearnedPolicy, LocalOnlyPolicy, OptimizedPolicy, Policy

logger = logging.getLogger("bench.harness")


@dataclass
class EpisodeOutcome:
    completed: int = 0
    dropped: int = 0
    latencies: list[float] = field(default_factory=list)
    energies: list[float] = field(default_factory=list)
    traces: list[list[TraceRecord]] = field(default_factory=list)

    @property
    def avg_latency_s(self) -> float:
        return math.fsum(self.latencies) / len(self.latencies) if self.latencies else math.nan

    @property
    def avg_energy_j(self) -> float:
        return math.fsum(self.energies) / len(self.energies) if self.energies else math.nan

    def extend(self, other: EpisodeOutcome) -> None:
        self.completed += other.completed
        self.dropped += other.dropped
        self.latencies += other.latencies
        self.energies += other.energies
        self.traces += other.traces


@dataclass
class ScenarioResult:
    """Aggregated row plus the per-run detail it was built from; ``traces[run][episode]``."""

    row: MetricsRow
    runs: list[RunMetrics]
    traces: list[list[list[TraceRecord]]] = field(default_factory=list)


def eval_env(config: SystemConfig, run: int, *, trace: bool = False) -> MecEnvironment:
    rng = seeded_rng(config.seed, config.num_users, run, StreamPurpose.EVAL_ARRIVALS)
    return MecEnvironment(config, rng, trace=trace)


def train_env(config: SystemConfig, run: int) -> MecEnvironment:
    rng = seeded_rng(config.seed, config.num_users, run, StreamPurpose.TRAIN_ARRIVALS)
    return MecEnvironment(config, rng)


def play_episode(env: MecEnvironment, decide: Callable, *, strict: bool = False) -> EpisodeOutcome:
    """One episode from reset; metrics cover every task decided during it."""
    env.reset()
    out = EpisodeOutcome()
    for _ in range(env.config.slots_per_episode):
        result = env.run_slot(decide)
        out.completed += result.metrics.completed
        out.dropped += result.metrics.dropped
        if strict:
            env.check_invariants()
    for done in env.state.completed:
        out.latencies.append(done.latency_s)
        out.energies.append(done.energy_j)
    out.traces = [list(env.trace_records)]
    return out


def play_episodes(env: MecEnvironment, decide: Callable, episodes: int, *, strict: bool = False) -> EpisodeOutcome:
    """``episodes`` consecutive episodes on one environment, pooled; ``traces`` keeps one list per episode."""
    out = EpisodeOutcome()
    for _ in range(episodes):
        out.extend(play_episode(env, decide, strict=strict))
    return out


def local_reference(config: SystemConfig, baseline: EpisodeOutcome) -> tuple[float, float]:
    """(T_ref, E_ref) from the all-local episodes, or the analytic local cost if it completed nothing."""
    if baseline.latencies:
        return baseline.avg_latency_s, baseline.avg_energy_j
    task = Task(id=0, owner=0, data_size_bits=config.data_size_bits, cycles_per_bit=config.cycles_per_bit)
    cost = local_cost(task, config.user_nodes()[0])
    return cost.latency_s, cost.energy_j


def build_policy(kind: PolicyKind, config: SystemConfig, run: int) -> Policy:
    if kind is PolicyKind.LOCAL_ONLY:
        return LocalOnlyPolicy()
    if kind is PolicyKind.OPTIMIZED:
        return OptimizedPolicy(config=config, weights=config.weights)
    agents, series = train_run(train_env(config, run), config, agent_rngs(config, run), mode=LEARNED_MODES[kind])
    logger.debug("%s run %d trained, last episode reward %s", kind.value, run, series[-1] if series else None)
    return LearnedPolicy(agents=agents, epsilon=config.rl.eval_epsilon, kind=kind)


def run_once(kind: PolicyKind, config: SystemConfig, run: int, *, trace: bool = False) -> tuple[RunMetrics, EpisodeOutcome]:
    policy = build_policy(kind, config, run)
    n_eval = config.rl.eval_episodes
    outcome = play_episodes(eval_env(config, run, trace=trace), policy.decide, n_eval)
    if kind is PolicyKind.LOCAL_ONLY:
        baseline = outcome
    else:
        baseline = play_episodes(eval_env(config, run), LocalOnlyPolicy().decide, n_eval)
    refs = local_reference(config, baseline)
    total = outcome.completed + outcome.dropped
    metrics = RunMetrics(
        completed=outcome.completed,
        dropped=outcome.dropped,
        avg_latency_s=outcome.avg_latency_s,
        avg_energy_j=outcome.avg_energy_j,
        qos=qos_score(outcome.avg_latency_s, outcome.avg_energy_j, config.weights, refs)
        if outcome.latencies
        else math.nan,
        reliability=reliability(outcome.completed, outcome.dropped) if total else math.nan,
    )
    if isinstance(policy, OptimizedPolicy) and policy.suboptimal_solves:
        logger.info("optimized run %d: %d slot solves hit the node limit", run, policy.suboptimal_solves)
    return metrics, outcome


def run_scenario(kind: PolicyKind, config: SystemConfig, *, trace: bool = False) -> ScenarioResult:
    """All Monte Carlo runs of one policy at ``config.num_users``."""
    runs: list[RunMetrics] = []
    traces: list[list[list[TraceRecord]]] = []
    for run in range(config.rl.monte_carlo_runs):
        metrics, outcome = run_once(kind, config, run, trace=trace)
        runs.append(metrics)
        if trace:
            traces.append(outcome.traces)
    row = MetricsRow.from_runs(kind, config.num_users, runs, config.weights)
    logger.info(
        "%-14s K=%-4d qos=%.4f rel=%.4f energy=%.4g J latency=%.4g s",
        kind.value,
        config.num_users,
        row.qos_mean,
        row.rel_mean,
        row.energy_mean,
        row.latency_mean,
    )
    return ScenarioResult(row=row, runs=runs, traces=traces)


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------

def _cell(args: tuple[PolicyKind, SystemConfig]) -> MetricsRow:
    kind, config = args
    return run_scenario(kind, config).row


def sweep_cells(
    policies: Sequence[PolicyKind],
    node_counts: Sequence[int],
    config: SystemConfig,
) -> list[tuple[PolicyKind, SystemConfig]]:
    if not node_counts:
        raise ValueError("node_counts must not be empty")
    if any(b <= a for a, b in zip(node_counts, node_counts[1:])):
        raise ValueError("node_counts must be strictly ascending")
    ordered = [p for p in POLICY_ORDER if p in set(policies)]
    return [(kind, config.with_users(n)) for n in node_counts for kind in ordered]


def sweep(
    policies: Sequence[PolicyKind],
    node_counts: Sequence[int],
    config: SystemConfig,
    *,
    workers: int = 1,
    on_row: Callable[[MetricsRow], None] | None = None,
) -> MetricsReport:
    """Every (policy, num_users) cell; ``on_row`` sees rows in deterministic order as they finish."""
    cells = sweep_cells(policies, node_counts, config)
    logger.info("Sweep: %d policies × %d node counts, %d worker(s)", len(policies), len(node_counts), workers)
    rows: list[MetricsRow] = []

    def collect(results: Iterable[MetricsRow]) -> None:
        for row in results:
            rows.append(row)
            if on_row is not None:
                on_row(row)

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            collect(pool.map(_cell, cells))
    else:
        collect(_cell(c) for c in cells)
    return MetricsReport.of(rows)


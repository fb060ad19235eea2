"""Experiment bench: policies, metrics, Monte Carlo harness, CSV exports and the CLI."""

from .export import FIGURES, SWEEP_COLUMNS, export_figure_data, write_sweep_csv, write_trace_csv
from .figures import check_figure_shapes, check_trends, shapes_pass, trends_pass
from .harness import ScenarioResult, play_episode, play_episodes, run_scenario, sweep
from .metrics import MetricsReport, MetricsRow, RunMetrics, mean_std, qos_score, reliability
from .policies import LearnedPolicy, LocalOnlyPolicy, OptimizedPolicy, Policy

__all__ = [
    "FIGURES",
    "SWEEP_COLUMNS",
    "export_figure_data",
    "write_sweep_csv",
    "write_trace_csv",
    "check_figure_shapes",
    "shapes_pass",
    "check_trends",
    "trends_pass",
    "ScenarioResult",
    "play_episode",
    "play_episodes",
    "run_scenario",
    "sweep",
    "MetricsReport",
    "MetricsRow",
    "RunMetrics",
    "mean_std",
    "qos_score",
    "reliability",
    "LearnedPolicy",
    "LocalOnlyPolicy",
    "OptimizedPolicy",
    "Policy",
]

"""Tests for metrics, the Monte Carlo harness, CSV exports, figure checks and the CLI."""

from __future__ import annotations

import csv
import math

import pytest

from agents.offloading import load_qtable_csv, num_states
from bench.cli import EXIT_CONFIG, EXIT_OK, EXIT_SHAPES, check_report, main, parse_nodes, parse_policies
from bench.export import FIGURES, export_figure_data, write_sweep_csv
from bench.figures import TREND_TOLERANCE, check_figure_shapes, check_trends, relative_slope, shapes_pass, trends_pass
from bench.harness import run_scenario, sweep, sweep_cells
from bench.metrics import MetricsReport, MetricsRow, mean_std, qos_score, reliability
from shared.loader import save_config
from shared.records import TaskStatus
from shared.schemas import POLICY_ORDER, PolicyKind, RLParams, SystemConfig, Weights

LOCAL = PolicyKind.LOCAL_ONLY
OPT = PolicyKind.OPTIMIZED
RL = PolicyKind.RL_OFFLOAD
LL = PolicyKind.RL_LEAST_LOAD


@pytest.fixture
def bench_config() -> SystemConfig:
    return SystemConfig(
        num_users=3,
        num_servers=2,
        slots_per_episode=8,
        arrival_rate_lambda=0.5,
        rl=RLParams(episodes=2, monte_carlo_runs=2),
    )


def _row(policy: PolicyKind, n: int, qos: float, rel: float, energy: float, latency: float) -> MetricsRow:
    return MetricsRow(
        policy=policy,
        num_users=n,
        qos_mean=qos,
        qos_std=0.0,
        rel_mean=rel,
        rel_std=0.0,
        energy_mean=energy,
        energy_std=0.0,
        latency_mean=latency,
        latency_std=0.0,
    )


def _shaped_points(n: int) -> list[MetricsRow]:
    """Rows at ``n`` users that satisfy every figure ordering."""
    return [
        _row(LOCAL, n, 0.5, 0.80, 100.0, 10.0),
        _row(OPT, n, 0.6, 0.90, 60.0, 30.0),
        _row(RL, n, 0.6, 0.92, 70.0, 40.0),
        _row(LL, n, 0.7, 0.95, 50.0, 50.0),
    ]


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def test_qos_score():
    w = Weights(w_a=5, w_b=5, phi=10)
    assert qos_score(10.0, 100.0, w, (10.0, 100.0)) == 0.5
    assert qos_score(5.0, 50.0, w, (10.0, 100.0)) == pytest.approx(10 / 15)
    with pytest.raises(ValueError):
        qos_score(1.0, 1.0, w, (0.0, 1.0))


def test_reliability():
    assert reliability(9, 1) == 0.9
    assert reliability(3, 0) == 1.0
    with pytest.raises(ValueError):
        reliability(0, 0)


def test_mean_std():
    assert mean_std([1.0, 3.0]) == (2.0, pytest.approx(math.sqrt(2)))
    assert mean_std([4.0]) == (4.0, 0.0)
    assert mean_std([2.0, math.nan]) == (2.0, 0.0)
    mean, std = mean_std([])
    assert math.isnan(mean) and math.isnan(std)


def test_report_orders_rows():
    rows = [_row(LL, 20, 1, 1, 1, 1), _row(LOCAL, 20, 1, 1, 1, 1), _row(OPT, 10, 1, 1, 1, 1)]
    report = MetricsReport.of(rows)
    assert [(r.num_users, r.policy) for r in report.rows] == [(10, OPT), (20, LOCAL), (20, LL)]
    assert report.node_counts == [10, 20]
    assert report.policies == [LOCAL, OPT, LL]
    assert report.get(RL, 10) is None


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------

def test_figure_export_columns_and_bytes(tmp_path):
    report = MetricsReport.of(_shaped_points(10) + _shaped_points(20))
    a = export_figure_data(report, "energy", tmp_path / "a.csv")
    b = export_figure_data(MetricsReport.of(reversed(report.rows)), "energy", tmp_path / "b.csv")
    assert a.read_bytes() == b.read_bytes()
    with a.open(newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["num_users", *(p.value for p in POLICY_ORDER)]
    assert rows[1] == ["10", "100.0", "60.0", "70.0", "50.0"]
    assert [r[0] for r in rows[1:]] == ["10", "20"]


def test_figure_export_errors(tmp_path):
    report = MetricsReport.of(_shaped_points(10))
    with pytest.raises(ValueError):
        export_figure_data(report, "throughput", tmp_path / "x.csv")
    with pytest.raises(ValueError):
        export_figure_data(MetricsReport(), "qos", tmp_path / "x.csv")
    with pytest.raises(OSError, match="missing"):
        export_figure_data(report, "qos", tmp_path / "missing" / "x.csv")


def test_figure_export_leaves_gaps(tmp_path):
    report = MetricsReport.of([_row(LOCAL, 10, 0.5, 1, 1, 1), _row(OPT, 20, 0.6, 1, 1, 1)])
    path = export_figure_data(report, "qos", tmp_path / "qos.csv")
    assert path.read_text().splitlines() == ["num_users,local_only,optimized", "10,0.5,", "20,,0.6"]


# ---------------------------------------------------------------------------
# Figure orderings
# ---------------------------------------------------------------------------

def test_shape_checks():
    broken = _shaped_points(30)
    broken[3] = _row(LL, 30, 0.1, 0.5, 500.0, 1.0)
    report = MetricsReport.of(_shaped_points(10) + _shaped_points(20) + broken + [_row(LOCAL, 40, 1, 1, 1, 1)])
    fractions = check_figure_shapes(report)
    assert set(fractions) == set(FIGURES)
    assert all(f == pytest.approx(2 / 3) for f in fractions.values())
    assert not shapes_pass(fractions)
    assert shapes_pass(check_figure_shapes(MetricsReport.of(_shaped_points(10))))


def test_shape_checks_without_complete_points():
    fractions = check_figure_shapes(MetricsReport.of([_row(LOCAL, 10, 1, 1, 1, 1)]))
    assert fractions == {f: 0.0 for f in FIGURES}


def test_relative_slope():
    assert relative_slope([10, 20, 30], [2.0, 2.0, 2.0]) == 0.0
    assert relative_slope([10, 20, 30], [1.0, 2.0, 3.0]) == pytest.approx(1.0)
    assert relative_slope([10, 30], [3.0, 1.0]) == pytest.approx(-1.0)
    assert relative_slope([10], [5.0]) == 0.0


def test_trend_checks():
    flat = MetricsReport.of(_shaped_points(10) + _shaped_points(20))
    slopes = check_trends(flat)
    assert set(slopes) == {(p, m) for p in (OPT, RL, LL) for m in ("energy", "latency")}
    assert trends_pass(slopes)

    falling = _shaped_points(20)
    falling[1] = _row(OPT, 20, 0.6, 0.90, 60.0 * (1 - 2 * TREND_TOLERANCE), 30.0)
    slopes = check_trends(MetricsReport.of(_shaped_points(10) + falling))
    assert slopes[(OPT, "energy")] < -TREND_TOLERANCE
    assert not trends_pass(slopes)
    assert trends_pass(slopes, tolerance=1.0)


# ---------------------------------------------------------------------------
# Harness
# ---------------------------------------------------------------------------

def test_local_only_scores_half(bench_config):
    result = run_scenario(LOCAL, bench_config)
    assert result.row.latency_mean == 62.5
    assert result.row.latency_std == 0.0
    assert result.row.qos_mean == 0.5
    assert len(result.runs) == bench_config.rl.monte_carlo_runs


def test_scenarios_are_deterministic(bench_config):
    for kind in (OPT, RL):
        assert run_scenario(kind, bench_config).row == run_scenario(kind, bench_config).row


def test_trace_matches_metrics(bench_config):
    result = run_scenario(OPT, bench_config, trace=True)
    assert len(result.traces) == len(result.runs)
    for metrics, episodes in zip(result.runs, result.traces):
        assert len(episodes) == bench_config.rl.eval_episodes
        trace = [t for records in episodes for t in records]
        done = [t for t in trace if t.status is TaskStatus.COMPLETED]
        dropped = [t for t in trace if t.status is TaskStatus.DROPPED]
        assert (len(done), len(dropped)) == (metrics.completed, metrics.dropped)
        if done:
            latency = math.fsum(t.t_comm + t.t_queue + t.t_comp for t in done) / len(done)
            energy = math.fsum(t.e_tx + t.e_comp for t in done) / len(done)
            assert latency == pytest.approx(metrics.avg_latency_s, rel=1e-9)
            assert energy == pytest.approx(metrics.avg_energy_j, rel=1e-9)


def test_energy_weighted_optimizer_spends_least(bench_config):
    cfg = bench_config.model_copy(update={"weights": Weights(w_a=0, w_b=10, phi=10)})
    rows = {kind: run_scenario(kind, cfg).row for kind in POLICY_ORDER}
    for kind in (LOCAL, RL, LL):
        assert rows[OPT].energy_mean <= rows[kind].energy_mean + 1e-9


def test_sweep_cells_order(bench_config):
    cells = sweep_cells([LL, LOCAL], [2, 4], bench_config)
    assert [(k, c.num_users) for k, c in cells] == [(LOCAL, 2), (LL, 2), (LOCAL, 4), (LL, 4)]
    with pytest.raises(ValueError):
        sweep_cells([LOCAL], [4, 2], bench_config)
    with pytest.raises(ValueError):
        sweep_cells([LOCAL], [], bench_config)


def test_sweep_is_byte_stable(bench_config, tmp_path):
    seen = []
    first = sweep([LOCAL, OPT], [2, 3], bench_config, on_row=seen.append)
    second = sweep([OPT, LOCAL], [2, 3], bench_config)
    assert [(r.num_users, r.policy) for r in seen] == [(2, LOCAL), (2, OPT), (3, LOCAL), (3, OPT)]
    a = write_sweep_csv(first, tmp_path / "a.csv")
    b = write_sweep_csv(second, tmp_path / "b.csv")
    assert a.read_bytes() == b.read_bytes()


def test_adding_policies_leaves_other_cells_alone(bench_config):
    alone = sweep([LOCAL], [3], bench_config)
    together = sweep([LOCAL, OPT, RL], [3], bench_config)
    assert alone.get(LOCAL, 3) == together.get(LOCAL, 3)

@pytest.mark.slow
def test_default_scenario_sweep_holds_orderings_and_trends():
    config = SystemConfig().with_rl(monte_carlo_runs=4)
    report = sweep(POLICY_ORDER, [20, 40, 60, 80, 100], config, workers=2)
    assert shapes_pass(check_figure_shapes(report))
    assert trends_pass(check_trends(report))



# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def test_parse_helpers():
    assert parse_nodes("10:30:10") == [10, 20, 30]
    assert parse_nodes("5,7") == [5, 7]
    assert parse_policies("local_only, optimized") == [LOCAL, OPT]


def test_cli_oracle(tmp_path):
    assert main(["oracle", "--instances", "15", "--max-tasks", "4", "--out", str(tmp_path)]) == EXIT_OK
    lines = (tmp_path / "oracle.csv").read_text().splitlines()
    assert len(lines) == 1 + 2 * 15
    assert all(line.endswith("True") for line in lines[1:])


def test_cli_run_writes_results(tmp_path, bench_config):
    cfg = save_config(bench_config, tmp_path / "bench.toml")
    out = tmp_path / "out"
    code = main(["run", "--config", str(cfg), "--policy", "local_only", "--nodes", "2", "--trace", "--out", str(out)])
    assert code == EXIT_OK
    assert (out / "run_local_only_2.csv").exists()
    assert (out / "trace_local_only_2.csv").read_text().startswith("run,episode,slot,user,task_id")


def test_cli_bad_config(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[system]\nnum_users = 0\n")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_check_report_exit_codes(capsys):
    assert check_report(MetricsReport.of(_shaped_points(10) + _shaped_points(20))) == EXIT_OK
    broken = _shaped_points(20)
    broken[3] = _row(LL, 20, 0.1, 0.5, 500.0, 1.0)
    assert check_report(MetricsReport.of(_shaped_points(10) + broken)) == EXIT_SHAPES
    out = capsys.readouterr().out
    assert "shapes: PASS" in out and "shapes: FAIL" in out


def test_cli_sweep_check_fails_without_all_schemes(tmp_path, bench_config):
    cfg = save_config(bench_config, tmp_path / "bench.toml")
    args = ["sweep", "--config", str(cfg), "--policy", "local_only", "--nodes", "2,3", "--out", str(tmp_path)]
    assert main(args) == EXIT_OK
    assert main([*args, "--check-shapes"]) == EXIT_SHAPES


def test_cli_surface_writes_qtables(tmp_path, bench_config):
    cfg = save_config(bench_config, tmp_path / "bench.toml")
    code = main(["surface", "--config", str(cfg), "--policy", "rl_least_load", "--nodes", "2", "--out", str(tmp_path)])
    assert code == EXIT_OK
    stem = "rl_least_load_2"
    assert (tmp_path / f"surface_{stem}.csv").exists()
    tables = sorted((tmp_path / f"qtables_{stem}").iterdir())
    assert [p.name for p in tables] == ["user_0.csv", "user_1.csv"]
    q = load_qtable_csv(tables[0], num_states(bench_config.rl.load_buckets, bench_config.num_servers), 2)
    assert q.values.shape == (64, 2)

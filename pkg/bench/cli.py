"""offload-bench: command-line front end of the experiment harness.

Subcommands
-----------
- ``run``      one (policy, num_users) scenario → ``run_<policy>_<K>.csv`` (+ trace)
- ``sweep``    policies × node counts → ``sweep.csv``, ``sweep_detail.csv``, ``fig_<figure>.csv``
- ``oracle``   certify branch-and-bound against exhaustive search on random instances
- ``surface``  train the learners and export the decision surface, the reward
               curve and every user's Q-table

Exit codes: 0 success, 1 config error, 2 runtime error, 3 infeasible optimisation,
4 figure orderings or trends failed under ``sweep --check-shapes``.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

from dotenv import load_dotenv

from agents.offloading import ActionMode, offload_decision_surface, save_qtable_csv, save_surface_csv, train
from optimizer import ENERGY_ONLY, brute_force_oracle, random_instance, solve_energy_min, solve_weighted
from shared.config import ENV_LOG_LEVEL, ENV_WORKERS
from shared.errors import ConfigError, InfeasibleError, OffloadError
from shared.loader import apply_overrides, load_config
from shared.rng import StreamPurpose, seeded_rng
from shared.schemas import PolicyKind, SystemConfig

from .export import DETAIL_COLUMNS, FIGURES, SweepWriter, export_figure_data, write_sweep_csv, write_trace_csv
from .figures import check_figure_shapes, check_trends, shapes_pass, trends_pass
from .harness import run_scenario, sweep, train_env
from .metrics import MetricsReport
from .policies import LEARNED_MODES

logger = logging.getLogger("bench.cli")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_INFEASIBLE = 3
EXIT_SHAPES = 4


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in {"1", "true", "yes", "on"}:
        return True
    if value in {"0", "false", "no", "off"}:
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def parse_nodes(text: str) -> list[int]:
    """``10,20,30`` or ``start:stop:step`` (stop inclusive)."""
    try:
        if ":" in text:
            start, stop, step = (int(p) for p in text.split(":"))
            return list(range(start, stop + 1, step))
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad node list {text!r}") from exc


def parse_policies(text: str) -> list[PolicyKind]:
    try:
        return [PolicyKind(p.strip()) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        names = ", ".join(p.value for p in PolicyKind)
        raise argparse.ArgumentTypeError(f"unknown policy in {text!r}; choose from {names}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML scenario file (defaults apply when absent)")
    common.add_argument("--seed", type=int, help="Master seed override")
    common.add_argument("--out", type=Path, default=Path("results"), help="Output directory")
    common.add_argument(
        "--use-modified-update",
        type=parse_bool,
        dest="use_modified",
        help="Exploration-weighted update with reward retention (true/false)",
    )

    parser = argparse.ArgumentParser(prog="offload-bench", description="MEC task-offloading experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="One policy at one node count")
    run.add_argument("--policy", type=PolicyKind, default=PolicyKind.RL_OFFLOAD)
    run.add_argument("--nodes", type=int, help="Active users K (default: config num_users)")
    run.add_argument("--trace", action="store_true", help="Write the per-task trace CSV")

    sw = sub.add_parser("sweep", parents=[common], help="Policies × node counts")
    sw.add_argument("--policy", type=parse_policies, help="Comma-separated policies (default: all)")
    sw.add_argument("--nodes", type=parse_nodes, help="10,20,30 or 10:100:10")
    sw.add_argument("--workers", type=int, help="Parallel sweep cells")
    sw.add_argument("--check-shapes", action="store_true", help="Check the figure orderings and trends; exit 4 on failure")

    orc = sub.add_parser("oracle", parents=[common], help="Certify the optimiser on random instances")
    orc.add_argument("--instances", type=int, default=500)
    orc.add_argument("--max-tasks", type=int, default=6)
    orc.add_argument("--max-servers", type=int, default=3)

    surf = sub.add_parser("surface", parents=[common], help="Decision-surface export")
    surf.add_argument(
        "--policy",
        type=PolicyKind,
        default=PolicyKind.RL_OFFLOAD,
        choices=list(LEARNED_MODES),
    )
    surf.add_argument("--nodes", type=int, help="Active users K (default: config num_users)")
    return parser


def resolve_config(args: argparse.Namespace) -> SystemConfig:
    config = load_config(args.config) if args.config else SystemConfig()
    return apply_overrides(config, seed=args.seed, use_modified=args.use_modified)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_run(args: argparse.Namespace, config: SystemConfig) -> int:
    if args.nodes is not None:
        config = apply_overrides(config, num_users=args.nodes)
    result = run_scenario(args.policy, config, trace=args.trace)
    stem = f"{args.policy.value}_{config.num_users}"
    write_sweep_csv(MetricsReport.of([result.row]), args.out / f"run_{stem}.csv", DETAIL_COLUMNS)
    if args.trace:
        write_trace_csv(result.traces, args.out / f"trace_{stem}.csv")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, config: SystemConfig) -> int:
    workers = args.workers or int(os.environ.get(ENV_WORKERS, 0)) or None
    config = apply_overrides(config, node_counts=args.nodes, policies=args.policy, workers=workers)
    sw = config.sweep
    with SweepWriter(args.out / "sweep.csv") as writer:
        report = sweep(sw.policies, sw.node_counts, config, workers=sw.workers, on_row=writer.write)
    write_sweep_csv(report, args.out / "sweep_detail.csv", DETAIL_COLUMNS)
    for figure in FIGURES:
        export_figure_data(report, figure, args.out / f"fig_{figure}.csv")
    if args.check_shapes:
        return check_report(report)
    return EXIT_OK


def check_report(report: MetricsReport) -> int:
    """Print the ordering fractions and trend slopes; ``EXIT_SHAPES`` when either check fails."""
    fractions = check_figure_shapes(report)
    for figure, frac in fractions.items():
        print(f"{figure:<12} {frac:.0%}")
    slopes = check_trends(report)
    for (policy, metric), slope in slopes.items():
        print(f"{policy.value:<14} {metric:<8} {slope:+.3f}")
    shapes_ok = shapes_pass(fractions)
    trends_ok = trends_pass(slopes)
    print("shapes:", "PASS" if shapes_ok else "FAIL")
    print("trends:", "PASS" if trends_ok else "FAIL")
    if shapes_ok and trends_ok:
        return EXIT_OK
    logger.error("Sweep failed its figure checks (shapes %s, trends %s)", shapes_ok, trends_ok)
    return EXIT_SHAPES


def cmd_oracle(args: argparse.Namespace, config: SystemConfig) -> int:
    mismatches = 0
    path = args.out / "oracle.csv"
    with path.open("w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["instance", "tasks", "servers", "problem", "solver_objective", "oracle_objective", "match"])
        for i in range(args.instances):
            rng = seeded_rng(config.seed, 0, i, StreamPurpose.INSTANCES)
            n = int(rng.integers(0, args.max_tasks + 1))
            m = int(rng.integers(1, args.max_servers + 1))
            inst = random_instance(rng, n, m)
            bound = float(rng.integers(20, 101))
            checks = (
                ("weighted", lambda: solve_weighted(inst, config.weights), lambda: brute_force_oracle(inst, config.weights)),
                (
                    "energy_min",
                    lambda: solve_energy_min(inst, bound),
                    lambda: brute_force_oracle(inst, ENERGY_ONLY, bound),
                ),
            )
            for problem, solve, exhaust in checks:
                got = _outcome(solve)
                want = _outcome(exhaust)
                match = got == want
                mismatches += not match
                out.writerow([i, n, m, problem, repr(got[0]), repr(want[0]), match])
    logger.info("Oracle certification: %d instances, %d mismatch(es) → %s", args.instances, mismatches, path)
    if mismatches:
        raise OffloadError(f"{mismatches} solver/oracle mismatch(es); see {path}")
    return EXIT_OK


def _outcome(solve) -> tuple[float | None, tuple[int, ...] | None]:
    try:
        sol = solve()
    except InfeasibleError:
        return None, None
    return sol.objective, sol.assignment.venues


def cmd_surface(args: argparse.Namespace, config: SystemConfig) -> int:
    if args.nodes is not None:
        config = apply_overrides(config, num_users=args.nodes)
    mode: ActionMode = LEARNED_MODES[args.policy]
    result = train(lambda run: train_env(config, run), config, mode=mode)
    grid = offload_decision_surface(result.tables, config)
    stem = f"{args.policy.value}_{config.num_users}"
    save_surface_csv(grid, args.out / f"surface_{stem}.csv")
    with (args.out / f"reward_{stem}.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["episode", "avg_reward"])
        for e, r in enumerate(result.reward_series):
            writer.writerow([e, repr(r)])
    qdir = args.out / f"qtables_{stem}"
    qdir.mkdir(exist_ok=True)
    for k, table in enumerate(result.tables):
        save_qtable_csv(table, qdir / f"user_{k}.csv")
    logger.info("Wrote %d Q-tables to %s", len(result.tables), qdir)
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "oracle": cmd_oracle,
    "surface": cmd_surface,
}


# ---------------------------------------------------------------------------
# Entrypoint
# ---------------------------------------------------------------------------

def main(argv: Sequence[str] | None = None) -> int:
    load_dotenv()
    logging.basicConfig(
        level=os.environ.get(ENV_LOG_LEVEL, "INFO").upper(),
        format="%(asctime)s [offload-bench] %(levelname)s  %(message)s",
        datefmt="%H:%M:%S",
    )
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        args.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args, config)
    except ConfigError as exc:
        logger.error("%s", exc)
        for issue in exc.issues:
            print(f"config: {issue}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        logger.error("%s", exc)
        return EXIT_INFEASIBLE
    except Exception as exc:  # noqa: BLE001
        logger.exception("%s failed: %s", args.command, exc)
        return EXIT_RUNTIME

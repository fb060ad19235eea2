"""CSV artifacts: sweep tables, per-figure data, per-task traces.

Every float is written with ``repr`` so identical reports give identical bytes.
"""

from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import IO, Any, Sequence

from shared.records import TRACE_COLUMNS, TraceRecord

from .metrics import MetricsReport, MetricsRow

logger = logging.getLogger("bench.export")

SWEEP_COLUMNS: tuple[str, ...] = (
    "policy",
    "num_users",
    "qos_mean",
    "qos_std",
    "rel_mean",
    "rel_std",
    "energy_mean",
    "energy_std",
    "latency_mean",
    "latency_std",
)
DETAIL_COLUMNS: tuple[str, ...] = (*SWEEP_COLUMNS, "cost_mean", "cost_std", "completed_total", "dropped_total")

FIGURES: tuple[str, ...] = ("qos", "reliability", "energy", "latency")


def _cell(value: object) -> object:
    return repr(value) if isinstance(value, float) else value


def sweep_row(row: MetricsRow, columns: Sequence[str] = SWEEP_COLUMNS) -> list[object]:
    data = row.model_dump()
    data["policy"] = row.policy.value
    return [_cell(data[c]) for c in columns]


class SweepWriter:
    """Appends sweep rows as they finish, flushing after each one."""

    def __init__(self, path: str | Path, columns: Sequence[str] = SWEEP_COLUMNS) -> None:
        self.path = Path(path)
        self.columns = tuple(columns)
        self._fh: IO[str] | None = None
        self._writer: Any = None

    def __enter__(self) -> SweepWriter:
        try:
            self._fh = self.path.open("w", newline="")
        except OSError as exc:
            raise OSError(f"cannot write sweep table to {self.path}: {exc}") from exc
        self._writer = csv.writer(self._fh)
        self._writer.writerow(self.columns)
        return self

    def write(self, row: MetricsRow) -> None:
        assert self._writer is not None and self._fh is not None
        self._writer.writerow(sweep_row(row, self.columns))
        self._fh.flush()

    def __exit__(self, *exc: object) -> None:
        if self._fh is not None:
            self._fh.close()


def write_sweep_csv(report: MetricsReport, path: str | Path, columns: Sequence[str] = SWEEP_COLUMNS) -> Path:
    with SweepWriter(path, columns) as writer:
        for row in report.rows:
            writer.write(row)
    return Path(path)


def export_figure_data(report: MetricsReport, figure: str, path: str | Path) -> Path:
    """``num_users`` plus one column per policy (canonical order) holding the figure's mean."""
    if figure not in FIGURES:
        raise ValueError(f"unknown figure {figure!r}; expected one of {FIGURES}")
    if not report.rows:
        raise ValueError("cannot export an empty report")
    policies = report.policies
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["num_users", *(p.value for p in policies)])
            for n in report.node_counts:
                cells = []
                for p in policies:
                    row = report.get(p, n)
                    cells.append(repr(row.metric(figure)) if row is not None else "")
                writer.writerow([n, *cells])
    except OSError as exc:
        raise OSError(f"cannot write {figure} data to {path}: {exc}") from exc
    logger.info("Wrote %s figure data to %s", figure, path)
    return path


def write_trace_csv(traces: Sequence[Sequence[Sequence[TraceRecord]]], path: str | Path) -> Path:
    """Per-task trace indexed ``traces[run][episode]``, with leading ``run`` and ``episode`` columns."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run", "episode", *TRACE_COLUMNS])
        for run, episodes in enumerate(traces):
            for episode, records in enumerate(episodes):
                for rec in records:
                    writer.writerow([run, episode, *rec.as_row()])
    return path

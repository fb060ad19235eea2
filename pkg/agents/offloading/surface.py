"""Offloading decision surface: predicted reward per load level and venue.

Row ``b`` reads the state in which the device and every server sit in load
bucket ``b``; each cell is the best value any agent holds for that action.
"""

from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import Sequence

import numpy as np

from shared.schemas import SystemConfig

from .qlearning import QTable
from .state import AgentState

logger = logging.getLogger("agents.offloading.surface")


def surface_state(level: int, config: SystemConfig) -> int:
    return AgentState(level, (level,) * config.num_servers).encode(config.rl.load_buckets)


def offload_decision_surface(tables: Sequence[QTable], config: SystemConfig) -> np.ndarray:
    """``B × num_actions`` grid of max-over-agents Q-values."""
    if not tables:
        raise ValueError("no Q-tables to read")
    b = config.rl.load_buckets
    grid = np.empty((b, tables[0].num_actions))
    for level in range(b):
        s = surface_state(level, config)
        grid[level] = np.max(np.stack([t.values[s] for t in tables]), axis=0)
    return grid


def save_surface_csv(grid: np.ndarray, path: str | Path) -> Path:
    """Columns: ``load_bucket, venue_0 .. venue_{A-1}``."""
    path = Path(path)
    header = ["load_bucket", *(f"venue_{a}" for a in range(grid.shape[1]))]
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for level, row in enumerate(grid):
                writer.writerow([level, *(repr(float(v)) for v in row)])
    except OSError as exc:
        raise OSError(f"cannot write decision surface to {path}: {exc}") from exc
    logger.info("Decision surface written to %s", path)
    return path

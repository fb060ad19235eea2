"""Qualitative figure orderings checked against a sweep report.

Each check returns, per figure, the fraction of node counts at which the
expected ordering between the four schemes holds.  The trend check fits a
line through each offloading scheme's energy and latency over node count
and accepts a relative decline no larger than ``TREND_TOLERANCE``.
"""

from __future__ import annotations

import logging
from typing import Callable, Sequence

import numpy as np

from shared.schemas import POLICY_ORDER, PolicyKind

from .metrics import MetricsReport, MetricsRow

logger = logging.getLogger("bench.figures")

SHAPE_THRESHOLD = 0.8
TREND_TOLERANCE = 0.05
TREND_METRICS: tuple[str, ...] = ("energy", "latency")

LOCAL = PolicyKind.LOCAL_ONLY
OPT = PolicyKind.OPTIMIZED
RL = PolicyKind.RL_OFFLOAD
LL = PolicyKind.RL_LEAST_LOAD

Point = dict[PolicyKind, float]


def _qos(p: Point) -> bool:
    return all(p[LL] >= p[k] for k in (OPT, RL, LOCAL))


def _reliability(p: Point) -> bool:
    local_min = all(p[LOCAL] < p[k] for k in (OPT, RL, LL))
    return local_min and p[LL] >= p[OPT] and p[LL] >= p[RL]


def _energy(p: Point) -> bool:
    return all(p[LL] <= p[k] for k in (OPT, RL, LOCAL))


def _latency(p: Point) -> bool:
    local_min = all(p[LOCAL] <= p[k] for k in (OPT, RL, LL))
    return local_min and p[LL] > p[OPT] and p[LL] > p[RL]


SHAPES: dict[str, Callable[[Point], bool]] = {
    "qos": _qos,
    "reliability": _reliability,
    "energy": _energy,
    "latency": _latency,
}


def check_figure_shapes(report: MetricsReport) -> dict[str, float]:
    """Fraction of sweep points satisfying each figure's ordering.

    Node counts missing any of the four schemes are skipped.
    """
    points: list[dict[PolicyKind, MetricsRow]] = []
    for n in report.node_counts:
        rows = {p: report.get(p, n) for p in POLICY_ORDER}
        complete = {p: r for p, r in rows.items() if r is not None}
        if len(complete) == len(POLICY_ORDER):
            points.append(complete)

    fractions: dict[str, float] = {}
    for figure, holds in SHAPES.items():
        if not points:
            fractions[figure] = 0.0
            continue
        ok = sum(1 for rows in points if holds({p: r.metric(figure) for p, r in rows.items()}))
        fractions[figure] = ok / len(points)
        logger.info("%-12s ordering holds at %d/%d points", figure, ok, len(points))
    return fractions


def shapes_pass(fractions: dict[str, float], threshold: float = SHAPE_THRESHOLD) -> bool:
    return all(f >= threshold for f in fractions.values())


# ---------------------------------------------------------------------------
# Trends over node count
# ---------------------------------------------------------------------------

def relative_slope(node_counts: Sequence[int], values: Sequence[float]) -> float:
    """Least-squares slope scaled to the swept range, as a fraction of the mean value."""
    x = np.asarray(node_counts, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.size < 2:
        return 0.0
    slope = float(np.polyfit(x, y, 1)[0])
    return slope * float(x[-1] - x[0]) / float(np.mean(y))


def check_trends(
    report: MetricsReport,
    policies: Sequence[PolicyKind] = (OPT, RL, LL),
    metrics: Sequence[str] = TREND_METRICS,
) -> dict[tuple[PolicyKind, str], float]:
    """Relative slope of every (policy, metric) series over the node counts it covers."""
    slopes: dict[tuple[PolicyKind, str], float] = {}
    for policy in policies:
        rows = [r for r in report.rows if r.policy is policy]
        if not rows:
            continue
        for metric in metrics:
            values = [r.metric(metric) for r in rows]
            slopes[(policy, metric)] = relative_slope([r.num_users for r in rows], values)
            logger.info("%-14s %-8s relative slope %+.4f", policy.value, metric, slopes[(policy, metric)])
    return slopes


def trends_pass(slopes: dict[tuple[PolicyKind, str], float], tolerance: float = TREND_TOLERANCE) -> bool:
    """Every series non-decreasing in node count, up to ``tolerance``."""
    return all(s >= -tolerance for s in slopes.values())

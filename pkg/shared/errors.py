"""Exception hierarchy shared by every package in the offloading toolkit.

The CLI maps these onto exit codes (see ``bench/cli.py``):

- **ConfigError**       → 1
- **InfeasibleError**   → 3
- anything else         → 2
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


class OffloadError(Exception):
    """Base class for all toolkit errors."""


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConfigIssue:
    """One violated invariant, tied to the offending field."""

    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.field}: {self.message}"


class ConfigError(OffloadError):
    """Raised when a scenario config violates one or more invariants.

    Every issue is collected, not just the first one.
    """

    def __init__(self, issues: Sequence[ConfigIssue]) -> None:
        self.issues: list[ConfigIssue] = list(issues)
        lines = "; ".join(str(i) for i in self.issues)
        super().__init__(f"{len(self.issues)} config issue(s): {lines}")


# ---------------------------------------------------------------------------
# Optimisation
# ---------------------------------------------------------------------------

class InfeasibleError(OffloadError):
    """No assignment satisfies the constraints."""

    def __init__(self, reason: str, task_ids: Sequence[int] = ()) -> None:
        self.reason = reason
        self.task_ids: list[int] = list(task_ids)
        suffix = f" (tasks {self.task_ids})" if self.task_ids else ""
        super().__init__(f"infeasible: {reason}{suffix}")


class InstanceTooLargeError(OffloadError):
    """Exhaustive enumeration refused because the search space is too big."""


# ---------------------------------------------------------------------------
# Simulation / learning
# ---------------------------------------------------------------------------

class InvariantViolation(OffloadError):
    """A hard runtime invariant (conservation, finiteness, ...) was broken."""


class ActionLengthError(OffloadError, ValueError):
    """The action vector passed to ``step`` does not have one entry per user."""

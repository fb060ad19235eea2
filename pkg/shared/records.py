"""Records emitted by the simulator for every task outcome and every slot.

Every completed or dropped task can be logged as a **TraceRecord**; the
bench writes them out as the per-task CSV trace (``--trace``).  Each slot
also yields a **SlotMetrics** summary.

    arrival -> decision -> COMPLETED | DROPPED
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field

# Column order of the per-task trace CSV.
TRACE_COLUMNS: tuple[str, ...] = (
    "slot",
    "user",
    "task_id",
    "venue",
    "t_comm",
    "t_queue",
    "t_comp",
    "e_tx",
    "e_comp",
    "status",
)


# ---------------------------------------------------------------------------
# Task outcome enum
# ---------------------------------------------------------------------------

class TaskStatus(str, Enum):
    """Final state of a task that left its user's pending queue."""

    COMPLETED = "completed"
    DROPPED = "dropped"


# ---------------------------------------------------------------------------
# Per-task trace record
# ---------------------------------------------------------------------------

class TraceRecord(BaseModel):
    """One row of the per-task trace.  Costs are zero for dropped tasks."""

    model_config = ConfigDict(frozen=True)

    slot: int = Field(..., ge=0, description="Slot in which the decision was taken")
    user: int = Field(..., ge=0, description="Owning user index")
    task_id: int = Field(..., ge=0, description="Task identifier")
    venue: int = Field(..., ge=0, description="0 = local, j = server j")
    t_comm: float = Field(default=0.0, ge=0, description="Uplink time (s)")
    t_queue: float = Field(default=0.0, ge=0, description="Wait behind queued cycles (s)")
    t_comp: float = Field(default=0.0, ge=0, description="Processing time (s)")
    e_tx: float = Field(default=0.0, ge=0, description="Transmit energy (J)")
    e_comp: float = Field(default=0.0, ge=0, description="Computation energy (J)")
    status: TaskStatus = Field(..., description="Completed or dropped")

    def as_row(self) -> list[object]:
        return [
            self.slot,
            self.user,
            self.task_id,
            self.venue,
            repr(self.t_comm),
            repr(self.t_queue),
            repr(self.t_comp),
            repr(self.e_tx),
            repr(self.e_comp),
            self.status.value,
        ]


# ---------------------------------------------------------------------------
# Per-slot summary
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SlotMetrics:
    """Totals for the tasks decided in one slot."""

    slot: int
    completed: int = 0
    dropped: int = 0
    energy_j: float = 0.0
    latency_s: float = 0.0

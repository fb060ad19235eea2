"""Slotted MEC simulation: cost models, Poisson arrivals, server queues, rewards."""

from .arrivals import generate_arrivals
from .costs import CostBreakdown, local_cost, offload_cost, reward_from_time
from .environment import (
    CompletedTask,
    DeviceState,
    DeviceView,
    DroppedTask,
    EnvSnapshot,
    EnvState,
    MecEnvironment,
    ServerState,
    ServerView,
    SlotService,
    StepResult,
    least_loaded_server,
    server_loads,
)

__all__ = [
    "generate_arrivals",
    "CostBreakdown",
    "local_cost",
    "offload_cost",
    "reward_from_time",
    "CompletedTask",
    "DeviceState",
    "DeviceView",
    "DroppedTask",
    "EnvSnapshot",
    "EnvState",
    "MecEnvironment",
    "ServerState",
    "ServerView",
    "SlotService",
    "StepResult",
    "least_loaded_server",
    "server_loads",
]

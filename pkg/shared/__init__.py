"""Shared domain types, configuration, and random-stream plumbing for the offloading toolkit."""

from .errors import (
    ActionLengthError,
    ConfigError,
    ConfigIssue,
    InfeasibleError,
    InstanceTooLargeError,
    InvariantViolation,
    OffloadError,
)
from .loader import apply_overrides, dump_config, load_config, parse_config, save_config, validate_config
from .records import SlotMetrics, TaskStatus, TraceRecord
from .rng import StreamPurpose, seeded_rng
from .schemas import (
    POLICY_ORDER,
    Assignment,
    CostParams,
    EdgeServer,
    Link,
    PolicyKind,
    RLParams,
    SweepParams,
    SystemConfig,
    Task,
    UserNode,
    Weights,
    check_assignment,
)

__all__ = [
    # errors
    "OffloadError",
    "ConfigError",
    "ConfigIssue",
    "InfeasibleError",
    "InstanceTooLargeError",
    "InvariantViolation",
    "ActionLengthError",
    # schemas
    "Task",
    "UserNode",
    "EdgeServer",
    "Link",
    "Weights",
    "Assignment",
    "check_assignment",
    "CostParams",
    "RLParams",
    "SweepParams",
    "SystemConfig",
    "PolicyKind",
    "POLICY_ORDER",
    # records
    "TaskStatus",
    "TraceRecord",
    "SlotMetrics",
    # config
    "validate_config",
    "load_config",
    "parse_config",
    "dump_config",
    "save_config",
    "apply_overrides",
    # rng
    "seeded_rng",
    "StreamPurpose",
]

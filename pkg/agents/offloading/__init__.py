# Offloading agents: independent tabular Q-learners, one per user
from simulator.costs import reward_from_time

from .agent import ActionMode, OffloadingAgents, TrainingResult, epsilon_at, run_episode, train, train_run
from .decisions import least_load_action, select_action, valid_binary_decisions, valid_decisions
from .qlearning import (
    AgentMemory,
    QTable,
    load_qtable_csv,
    q_update_modified,
    q_update_standard,
    retained_reward,
    sample_tau,
    save_qtable_csv,
)
from .state import AgentState, bucket, num_states, observe
from .surface import offload_decision_surface, save_surface_csv

__all__ = [
    "ActionMode",
    "OffloadingAgents",
    "TrainingResult",
    "epsilon_at",
    "run_episode",
    "train",
    "train_run",
    "least_load_action",
    "select_action",
    "valid_binary_decisions",
    "valid_decisions",
    "AgentMemory",
    "QTable",
    "q_update_standard",
    "q_update_modified",
    "reward_from_time",
    "sample_tau",
    "retained_reward",
    "save_qtable_csv",
    "load_qtable_csv",
    "AgentState",
    "bucket",
    "num_states",
    "observe",
    "offload_decision_surface",
    "save_surface_csv",
]

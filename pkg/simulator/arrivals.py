"""Poisson task arrivals, one draw per user per slot."""

from __future__ import annotations

import numpy as np

from shared.schemas import Task


def generate_arrivals(
    lam: float,
    num_users: int,
    slot: int,
    rng: np.random.Generator,
    *,
    data_size_bits: int,
    cycles_per_bit: int,
    first_task_id: int = 0,
) -> list[Task]:
    """Draw this slot's new tasks, ordered by owner then arrival.

    Task ids are consecutive from ``first_task_id``.  Capping against the
    per-user pending limit is the environment's job.
    """
    if lam <= 0:
        raise ValueError(f"arrival rate must be > 0, got {lam}")
    counts = rng.poisson(lam, size=num_users)
    tasks: list[Task] = []
    next_id = first_task_id
    for user, n in enumerate(counts.tolist()):
        for _ in range(n):
            tasks.append(
                Task(
                    id=next_id,
                    owner=user,
                    data_size_bits=data_size_bits,
                    cycles_per_bit=cycles_per_bit,
                    arrival_slot=slot,
                )
            )
            next_id += 1
    return tasks

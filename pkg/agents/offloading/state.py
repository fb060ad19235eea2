"""Discretised agent state: own device backlog plus every server's load.

Each component is a load fraction quantised into ``B`` buckets::

    bucket = min(B - 1, floor(fraction · B))

so with B=4 the edges are 0, .25, .5, .75 and a full queue lands in the
top bucket.  States encode to integers in ``[0, B^(M+1))`` as mixed-radix
numbers, own bucket least significant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from simulator.environment import EnvSnapshot, EnvState


def num_states(buckets: int, num_servers: int) -> int:
    return buckets ** (num_servers + 1)


def bucket(fraction: float, buckets: int) -> int:
    if fraction <= 0:
        return 0
    return min(buckets - 1, math.floor(fraction * buckets))


@dataclass(frozen=True, slots=True)
class AgentState:
    own_backlog_bucket: int
    server_load_buckets: tuple[int, ...]

    @property
    def digits(self) -> tuple[int, ...]:
        return (self.own_backlog_bucket, *self.server_load_buckets)

    def encode(self, buckets: int) -> int:
        index = 0
        for d in reversed(self.digits):
            if not 0 <= d < buckets:
                raise ValueError(f"bucket {d} outside [0, {buckets - 1}]")
            index = index * buckets + d
        return index

    @classmethod
    def decode(cls, index: int, buckets: int, num_servers: int) -> AgentState:
        if not 0 <= index < num_states(buckets, num_servers):
            raise ValueError(f"state index {index} outside [0, {num_states(buckets, num_servers)})")
        digits = []
        for _ in range(num_servers + 1):
            index, d = divmod(index, buckets)
            digits.append(d)
        return cls(own_backlog_bucket=digits[0], server_load_buckets=tuple(digits[1:]))


def observe(state: EnvState | EnvSnapshot, user: int, buckets: int) -> AgentState:
    """What ``user`` sees: its device queue fill and each server's cycle fill."""
    dev = state.devices[user]
    own = dev.queued_tasks / dev.node.local_queue_capacity
    loads = tuple(bucket(s.queued_cycles / s.server.capacity_cycles, buckets) for s in state.servers)
    return AgentState(own_backlog_bucket=bucket(own, buckets), server_load_buckets=loads)

"""Evacuation ordering policies and the priority store backing them.

Two policies decide which stored item leaves first:

- sla: highest SLA level first, so contractually urgent data drains early.
- lifo: most recently stored first, via a per-store counter that grows by
  one on every insert.

The store always pops the highest priority value; items with equal values
leave in insertion order.
"""

from __future__ import annotations

import enum
import heapq
from typing import Iterator

from .workload import DataItem


class Policy(enum.Enum):
    SLA = "sla"
    LIFO = "lifo"

    @classmethod
    def parse(cls, token: str) -> "Policy":
        try:
            return cls(token.strip().lower())
        except (ValueError, AttributeError):
            valid = ", ".join(p.value for p in cls)
            raise ValueError(f"unknown policy {token!r}; expected one of: {valid}") from None


class StoreEmpty(LookupError):
    """Raised when popping from a store with no items."""


class PriorityStore:
    """Max-first store, stable among equal priorities.

    The heap holds (-priority, insertion_seq, item) so the largest priority
    wins and ties break toward the earliest insert.
    """

    def __init__(self) -> None:
        self._heap: list[tuple[float, int, DataItem]] = []
        self._seq = 0

    def __len__(self) -> int:
        return len(self._heap)

    def __bool__(self) -> bool:
        return bool(self._heap)

    def put(self, item: DataItem, priority: float) -> None:
        heapq.heappush(self._heap, (-priority, self._seq, item))
        self._seq += 1

    def pop(self) -> DataItem:
        if not self._heap:
            raise StoreEmpty("store is empty")
        return heapq.heappop(self._heap)[2]

    def peek(self) -> DataItem:
        if not self._heap:
            raise StoreEmpty("store is empty")
        return self._heap[0][2]

    def drain(self) -> Iterator[DataItem]:
        """Pop everything in priority order."""
        while self._heap:
            yield self.pop()

    def items(self) -> list[DataItem]:
        """Snapshot of stored items, in no particular order."""
        return [entry[2] for entry in self._heap]


class Prioritizer:
    """Maps an item to its priority value under one policy.

    LIFO keeps one counter per store, so the value records arrival recency
    at that data center only.
    """

    def __init__(self, policy: Policy):
        self.policy = policy
        self._lifo_next = 0

    def priority_of(self, item: DataItem) -> int:
        if self.policy is Policy.SLA:
            return item.sla
        value = self._lifo_next
        self._lifo_next += 1
        return value

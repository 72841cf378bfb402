"""Deterministic discrete-event core: event queue, simulation clock, seeded random streams.

Events are totally ordered by (time, seq); seq is assigned at scheduling time,
so same-time events run in the order they were scheduled. Random variates come
from labeled streams derived from one master seed, so adding a consumer of a
new stream never perturbs the draws of existing ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from heapq import heappop, heappush
from typing import Any, Callable, Optional

import numpy as np


class EventKind(Enum):
    ARRIVAL = "arrival"
    DETECTION = "detection"
    FLOW_UPDATE = "flow_update"
    ATTACK = "attack"
    END_OF_RUN = "end_of_run"


@dataclass(order=True, slots=True)
class Event:
    time: float
    seq: int
    kind: EventKind = field(compare=False)
    payload: Any = field(compare=False, default=None)


class SchedulingInPastError(RuntimeError):
    """An event was scheduled before the current clock (an engine bug, never a model state)."""


class EventLoop:
    """Time-ordered event queue with a monotonic clock."""

    def __init__(self, trace: bool = False):
        self.now = 0.0
        self.processed = 0
        self._heap: list[Event] = []
        self._next_seq = 0
        self._handlers: dict[EventKind, Callable[[float, Any], None]] = {}
        self.trace: Optional[list[tuple[float, int, str]]] = [] if trace else None

    def on(self, kind: EventKind, handler: Callable[[float, Any], None]) -> None:
        """Register the handler for a kind; it receives (event time, payload)."""
        self._handlers[kind] = handler

    def schedule(self, time: float, kind: EventKind, payload: Any = None) -> Event:
        if not math.isfinite(time):
            raise SchedulingInPastError(f"non-finite event time {time!r}")
        if time < self.now:
            raise SchedulingInPastError(
                f"schedule at t={time} before current clock t={self.now}"
            )
        event = Event(time, self._next_seq, kind, payload)
        self._next_seq += 1
        heappush(self._heap, event)
        return event

    def peek_time(self) -> Optional[float]:
        return self._heap[0].time if self._heap else None

    def run_until(self, t_end: float) -> float:
        """Process every pending event with time <= t_end; the clock ends at t_end."""
        while self._heap and self._heap[0].time <= t_end:
            event = heappop(self._heap)
            assert event.time >= self.now, "clock would move backwards"
            self.now = event.time
            self.processed += 1
            if self.trace is not None:
                self.trace.append((event.time, event.seq, event.kind.value))
            handler = self._handlers.get(event.kind)
            if handler is not None:
                handler(event.time, event.payload)
        if t_end > self.now:
            self.now = t_end
        return self.now


# --- distributions ----------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Constant:
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"constant must be finite, got {self.value!r}")


@dataclass(frozen=True, slots=True)
class ExponentialMean:
    mean: float

    def __post_init__(self):
        if not (self.mean > 0 and math.isfinite(self.mean)):
            raise ValueError(f"exponential mean must be > 0, got {self.mean!r}")


@dataclass(frozen=True, slots=True)
class UniformReal:
    low: float
    high: float

    def __post_init__(self):
        if not (math.isfinite(self.low) and math.isfinite(self.high) and self.low <= self.high):
            raise ValueError(f"uniform bounds invalid: [{self.low!r}, {self.high!r}]")


@dataclass(frozen=True, slots=True)
class UniformInteger:
    low: int
    high: int

    def __post_init__(self):
        if self.low > self.high:
            raise ValueError(f"uniform integer bounds invalid: [{self.low}, {self.high}]")
        if self.low < 0:
            raise ValueError("uniform integer bounds must be non-negative")


Distribution = Constant | ExponentialMean | UniformReal | UniformInteger


class StreamLabel(Enum):
    ARRIVAL_TIMES = 0
    ITEM_SIZES = 1
    SLA_LEVELS = 2


class RngStream:
    """One labeled variate stream derived from a master seed.

    Identical (seed, label) always replays the same sequence. Draws of one
    distribution are prefetched in blocks; numpy generates blocks from the
    same bit stream as repeated scalar calls, so batching does not change
    the sequence for a stream that serves a single distribution.
    """

    def __init__(self, seed: int, label: StreamLabel, block: int = 1024):
        self.seed = seed
        self.label = label
        self._gen = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(label.value,))
        )
        self._block = max(1, block)
        self._buf: Optional[np.ndarray] = None
        self._buf_dist: Optional[Distribution] = None
        self._pos = 0

    def _fill(self, dist: Distribution) -> None:
        n = self._block
        if isinstance(dist, ExponentialMean):
            self._buf = self._gen.exponential(dist.mean, size=n)
        elif isinstance(dist, UniformReal):
            self._buf = self._gen.uniform(dist.low, dist.high, size=n)
        elif isinstance(dist, UniformInteger):
            self._buf = self._gen.integers(dist.low, dist.high, size=n, endpoint=True)
        else:
            raise TypeError(f"unsupported distribution {dist!r}")
        self._buf_dist = dist
        self._pos = 0

    def draw(self, dist: Distribution) -> float:
        if isinstance(dist, Constant):
            return dist.value
        if self._buf is None or dist != self._buf_dist or self._pos >= len(self._buf):
            self._fill(dist)
        value = self._buf[self._pos]
        self._pos += 1
        return int(value) if isinstance(dist, UniformInteger) else float(value)

    def draw_batch(self, dist: Distribution, n: int) -> np.ndarray:
        """n draws at once; equals n sequential draw() calls on a fresh stream."""
        if isinstance(dist, Constant):
            return np.full(n, dist.value)
        out = np.empty(n)
        for i in range(n):
            out[i] = self.draw(dist)
        return out


def make_streams(seed: int, block: int = 1024) -> dict[StreamLabel, RngStream]:
    """All labeled streams for one run, derived from the run's master seed."""
    return {label: RngStream(seed, label, block=block) for label in StreamLabel}

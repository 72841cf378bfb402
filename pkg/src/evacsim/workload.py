"""Client populations, Poisson arrivals, and data-item generation with SLA levels.

Each client produces items as a Poisson process (exponential inter-arrival
times). Every item gets an integer SLA level in 90..99 drawn by rounding a
uniform(90, 99) variate half away from zero, which puts mass 1/18 on each
endpoint and 1/9 on each interior level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .des import (
    Constant,
    Distribution,
    ExponentialMean,
    RngStream,
    StreamLabel,
    UniformInteger,
    UniformReal,
)

SLA_MIN = 90
SLA_MAX = 99
_SLA_DIST = UniformReal(float(SLA_MIN), float(SLA_MAX))


@dataclass(frozen=True, slots=True)
class Client:
    id: int
    home_dc: str
    mean_interarrival: float

    def __post_init__(self):
        if not self.mean_interarrival > 0:
            raise ValueError("mean inter-arrival must be > 0")


@dataclass(slots=True)
class DataItem:
    id: int
    size: int
    sla: int
    created_at: float
    origin_client: int
    home_dc: str


def assign_sla(stream: RngStream) -> int:
    """Integer SLA level: uniform(90, 99) rounded half away from zero."""
    return int(math.floor(stream.draw(_SLA_DIST) + 0.5))


def next_arrival_delay(client: Client, stream: RngStream) -> float:
    """Exponential inter-arrival delay with the client's mean (Poisson process)."""
    return stream.draw(ExponentialMean(client.mean_interarrival))


def validate_size_dist(dist: Distribution) -> None:
    if isinstance(dist, Constant):
        if dist.value < 1 or dist.value != int(dist.value):
            raise ValueError(f"item size must be a positive integer, got {dist.value!r}")
    elif isinstance(dist, UniformInteger):
        if dist.low < 1:
            raise ValueError("item sizes must be >= 1 byte")
    else:
        raise ValueError(f"item size distribution must be constant or uniform integer, got {dist!r}")


class ItemFactory:
    """Stamps out data items with run-unique ids from the labeled streams."""

    def __init__(self, streams: dict[StreamLabel, RngStream], size_dist: Distribution):
        validate_size_dist(size_dist)
        self._sla_stream = streams[StreamLabel.SLA_LEVELS]
        self._size_stream = streams[StreamLabel.ITEM_SIZES]
        self._size_dist = size_dist
        self._next_id = 0

    def make(self, client: Client, now: float) -> DataItem:
        item = DataItem(
            id=self._next_id,
            size=int(self._size_stream.draw(self._size_dist)),
            sla=assign_sla(self._sla_stream),
            created_at=now,
            origin_client=client.id,
            home_dc=client.home_dc,
        )
        self._next_id += 1
        return item


def build_clients(
    clients_per_dc: dict[str, int], mean_interarrival: float
) -> list[Client]:
    """One client roster for the run; ids are dense and ordered by DC label."""
    clients = []
    next_id = 0
    for dc in sorted(clients_per_dc):
        count = clients_per_dc[dc]
        if count < 0:
            raise ValueError(f"client count for {dc} must be >= 0")
        for _ in range(count):
            clients.append(Client(next_id, dc, mean_interarrival))
            next_id += 1
    return clients

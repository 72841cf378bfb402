"""Evacuation lifecycle: normal storage, alert-mode draining, attack destruction.

A run has three phases per threatened data center. During normal operation
clients store items into the DC's priority store. At the detection instant
the DC enters alert mode, picks the nearest safe DC, and starts draining the
store over the shortest path, highest priority first, while arrivals keep
landing. At the attack instant the DC is destroyed: whatever was not fully
delivered, including a partially transmitted item, is lost.

Bandwidth sharing between concurrent evacuation flows is equal split per
link, then each flow runs at the minimum of its per-link shares. Rates are
piecewise constant between flow start/finish/idle transitions, so item
completion times are exact arithmetic, not per-packet events.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .des import Distribution, EventKind, EventLoop, StreamLabel, make_streams
from .metrics import item_packet_stats
from .policy import Policy, Prioritizer, PriorityStore
from .topology import Link, Topology, TopologyError, nearest_safe_dc
from .workload import Client, DataItem, ItemFactory, build_clients, next_arrival_delay

RATE_EPS = 1e-9


class DcMode(Enum):
    NORMAL = "normal"
    ALERT = "alert"
    DESTROYED = "destroyed"


@dataclass(frozen=True, slots=True)
class EvacuationPlan:
    source: str
    target: str
    path: tuple[str, ...]
    detection_at: float
    attack_at: float

    def __post_init__(self):
        if not self.detection_at < self.attack_at:
            raise ValueError("detection must precede the attack")


@dataclass(slots=True)
class Transmission:
    """One item in flight on a flow.

    seg_* describe the open segment: transmitting at seg_rate since seg_t0,
    with seg_b0 bytes already delivered at seg_t0. Closed segments are
    appended to `segments` as (t0, t1, rate_bps, bytes_at_t0, bytes_at_t1).
    """

    item: DataItem
    remaining_bits: float
    seg_t0: float = 0.0
    seg_b0: float = 0.0
    seg_rate: float = 0.0
    segments: list[tuple[float, float, float, float, float]] = field(default_factory=list)

    def bytes_done(self) -> float:
        return self.item.size - self.remaining_bits / 8.0

    def settle(self, now: float) -> None:
        """Close the open segment at `now`, crediting bits sent at seg_rate."""
        if self.seg_rate > 0.0 and now > self.seg_t0:
            sent = self.seg_rate * (now - self.seg_t0)
            self.remaining_bits = max(0.0, self.remaining_bits - sent)
            self.segments.append(
                (self.seg_t0, now, self.seg_rate, self.seg_b0, self.bytes_done())
            )
        self.seg_t0 = now
        self.seg_b0 = self.bytes_done()
        self.seg_rate = 0.0

    def open_segment(self, now: float, rate: float) -> None:
        self.seg_t0 = now
        self.seg_b0 = self.bytes_done()
        self.seg_rate = rate

    def close_complete(self, now: float) -> None:
        """Item fully delivered at `now`; pin the byte count to the exact size."""
        self.segments.append(
            (self.seg_t0, now, self.seg_rate, self.seg_b0, float(self.item.size))
        )
        self.remaining_bits = 0.0
        self.seg_rate = 0.0


@dataclass(slots=True)
class Flow:
    plan: EvacuationPlan
    links: list[Link]
    rate: float = 0.0
    current: Transmission | None = None
    epoch: int = 0
    alive: bool = True
    # Closed busy intervals (t0, t1, rate_bps); open one in _trace_open.
    rate_trace: list[tuple[float, float, float]] = field(default_factory=list)
    _trace_open: tuple[float, float] | None = None

    def note_rate(self, now: float, rate: float) -> None:
        if self._trace_open is not None:
            t0, r0 = self._trace_open
            if r0 != rate:
                if now > t0:
                    self.rate_trace.append((t0, now, r0))
                self._trace_open = (now, rate) if rate > 0.0 else None
        elif rate > 0.0:
            self._trace_open = (now, rate)

    def close_trace(self, now: float) -> None:
        if self._trace_open is not None:
            t0, r0 = self._trace_open
            if now > t0:
                self.rate_trace.append((t0, now, r0))
            self._trace_open = None


@dataclass(slots=True)
class DcAccount:
    """Byte and packet bookkeeping for one threatened DC."""

    dc: str
    stored_bytes: int = 0
    stored_count: int = 0
    stored_bytes_by_sla: dict[int, int] = field(default_factory=dict)
    stored_count_by_sla: dict[int, int] = field(default_factory=dict)
    saved_bytes: int = 0
    saved_bytes_by_sla: dict[int, int] = field(default_factory=dict)
    saved_count_by_sla: dict[int, int] = field(default_factory=dict)
    saved_pre_detection_bytes_by_sla: dict[int, int] = field(default_factory=dict)
    lost_bytes: int = 0
    packet_count: int = 0
    packet_latency_sum_ms: float = 0.0

    def note_stored(self, item: DataItem) -> None:
        self.stored_bytes += item.size
        self.stored_count += 1
        self.stored_bytes_by_sla[item.sla] = self.stored_bytes_by_sla.get(item.sla, 0) + item.size
        self.stored_count_by_sla[item.sla] = self.stored_count_by_sla.get(item.sla, 0) + 1

    def note_saved(self, item: DataItem, detection_at: float) -> None:
        self.saved_bytes += item.size
        self.saved_bytes_by_sla[item.sla] = self.saved_bytes_by_sla.get(item.sla, 0) + item.size
        self.saved_count_by_sla[item.sla] = self.saved_count_by_sla.get(item.sla, 0) + 1
        if item.created_at < detection_at:
            prior = self.saved_pre_detection_bytes_by_sla.get(item.sla, 0)
            self.saved_pre_detection_bytes_by_sla[item.sla] = prior + item.size


@dataclass(frozen=True, slots=True)
class RunTrace:
    """Optional audit trail: store operations and delivered items, in event order."""

    store_ops: tuple[tuple, ...]
    deliveries: tuple[tuple[str, int, float], ...]
    # (dc, item id, size, transmission segments) per delivered item
    delivery_segments: tuple[tuple[str, int, int, tuple], ...]
    events: tuple[tuple[float, int, str], ...]


class Simulation:
    """One evacuation run: builds all state from scratch, fully deterministic."""

    def __init__(
        self,
        topo: Topology,
        policy: Policy,
        clients_per_dc: dict[str, int],
        mean_interarrival: float,
        size_dist: Distribution,
        risk_set: set[str],
        attack_at: float,
        window: float,
        seed: int,
        trace: bool = False,
    ):
        if not attack_at > 0:
            raise ValueError("attack instant must be > 0")
        if not 0 < window <= attack_at:
            raise ValueError("evacuation window must be in (0, attack_at]")
        dcs = set(topo.data_centers)
        unknown = sorted(set(risk_set) - dcs)
        if unknown:
            raise ValueError(f"risk set names non-DC nodes: {', '.join(unknown)}")
        unknown = sorted(set(clients_per_dc) - dcs)
        if unknown:
            raise ValueError(f"clients assigned to non-DC nodes: {', '.join(unknown)}")

        self.topo = topo
        self.policy = policy
        self.risk_set = frozenset(risk_set)
        self.attack_at = float(attack_at)
        self.detection_at = float(attack_at) - float(window)
        self.seed = seed

        self.loop = EventLoop(trace=trace)
        self.loop.on(EventKind.ARRIVAL, self._on_arrival)
        self.loop.on(EventKind.DETECTION, self._on_detection)
        self.loop.on(EventKind.FLOW_UPDATE, self._on_flow_update)
        self.loop.on(EventKind.ATTACK, self._on_attack)
        self.loop.on(EventKind.END_OF_RUN, self._on_end)

        self.streams = make_streams(seed)
        self.clients: list[Client] = build_clients(clients_per_dc, mean_interarrival)
        self.factory = ItemFactory(self.streams, size_dist)

        self.mode: dict[str, DcMode] = {dc: DcMode.NORMAL for dc in topo.data_centers}
        self.stores: dict[str, PriorityStore] = {dc: PriorityStore() for dc in topo.data_centers}
        self.prioritizers: dict[str, Prioritizer] = {
            dc: Prioritizer(policy) for dc in topo.data_centers
        }
        self.flows: dict[str, Flow] = {}
        self.accounts: dict[str, DcAccount] = {
            dc: DcAccount(dc) for dc in sorted(self.risk_set)
        }
        self.finished = False

        self._trace_on = trace
        self._store_ops: list[tuple] = []
        # (dc, item id, delivered at)
        self._deliveries: list[tuple[str, int, float]] = []
        self._delivery_segments: list[tuple[str, int, int, tuple]] = []

        # Fixed events first so the attack outranks anything scheduled later
        # for the same instant: an item completing exactly at attack_at is lost.
        self.loop.schedule(self.detection_at, EventKind.DETECTION)
        self.loop.schedule(self.attack_at, EventKind.ATTACK)
        self.loop.schedule(self.attack_at, EventKind.END_OF_RUN)
        arrivals = self.streams[StreamLabel.ARRIVAL_TIMES]
        for idx, client in enumerate(self.clients):
            t0 = next_arrival_delay(client, arrivals)
            if t0 <= self.attack_at:
                self.loop.schedule(t0, EventKind.ARRIVAL, idx)

    # -- event handlers -----------------------------------------------------

    def _on_arrival(self, now: float, client_idx: int) -> None:
        client = self.clients[client_idx]
        dc = client.home_dc
        if self.mode[dc] is not DcMode.DESTROYED:
            item = self.factory.make(client, now)
            priority = self.prioritizers[dc].priority_of(item)
            self.stores[dc].put(item, priority)
            if self._trace_on:
                self._store_ops.append(("put", dc, item.id, item.sla, item.created_at))
            account = self.accounts.get(dc)
            if account is not None:
                account.note_stored(item)
            flow = self.flows.get(dc)
            if flow is not None and flow.alive and flow.current is None:
                self._start_next_item(flow, now)
                self._rebalance(now)
        delay = next_arrival_delay(client, self.streams[StreamLabel.ARRIVAL_TIMES])
        t_next = now + delay
        if t_next <= self.attack_at:
            self.loop.schedule(t_next, EventKind.ARRIVAL, client_idx)

    def _on_detection(self, now: float, _payload) -> None:
        for dc in sorted(self.risk_set):
            self.mode[dc] = DcMode.ALERT
            try:
                target, path, _weight = nearest_safe_dc(self.topo, dc, self.risk_set)
            except TopologyError:
                # Nowhere to run: the DC stays in alert but loses everything.
                continue
            plan = EvacuationPlan(dc, target, tuple(path), now, self.attack_at)
            links = [self.topo.link(path[i], path[i + 1]) for i in range(len(path) - 1)]
            self.flows[dc] = Flow(plan=plan, links=links)
        for dc in sorted(self.flows):
            flow = self.flows[dc]
            if self.stores[dc]:
                self._start_next_item(flow, now)
        self._rebalance(now)

    def _on_flow_update(self, now: float, payload) -> None:
        dc, epoch = payload
        flow = self.flows.get(dc)
        if flow is None or not flow.alive or flow.epoch != epoch:
            return
        tx = flow.current
        assert tx is not None
        tx.close_complete(now)
        self._deliver(dc, tx, now)
        flow.current = None
        if self.stores[dc]:
            # Same flow set stays busy, so rates are unchanged; just launch
            # the next item at the current rate.
            self._start_next_item(flow, now)
            tx2 = flow.current
            assert tx2 is not None
            tx2.open_segment(now, flow.rate)
            flow.epoch += 1
            done_at = now + tx2.remaining_bits / flow.rate
            self.loop.schedule(done_at, EventKind.FLOW_UPDATE, (dc, flow.epoch))
        else:
            flow.rate = 0.0
            flow.note_rate(now, 0.0)
            self._rebalance(now)

    def _on_attack(self, now: float, _payload) -> None:
        for dc in sorted(self.risk_set):
            self.mode[dc] = DcMode.DESTROYED
            account = self.accounts[dc]
            in_flight = 0
            flow = self.flows.get(dc)
            if flow is not None:
                flow.alive = False
                flow.epoch += 1
                flow.close_trace(now)
                if flow.current is not None:
                    # Partially transmitted item: all of it is lost.
                    in_flight = flow.current.item.size
                    flow.current = None
            left_in_store = sum(it.size for it in self.stores[dc].items())
            account.lost_bytes = left_in_store + in_flight
            assert account.saved_bytes + account.lost_bytes == account.stored_bytes

    def _on_end(self, now: float, _payload) -> None:
        self.finished = True

    # -- flow mechanics -----------------------------------------------------

    def _start_next_item(self, flow: Flow, now: float) -> None:
        dc = flow.plan.source
        item = self.stores[dc].pop()
        if self._trace_on:
            self._store_ops.append(("pop", dc, item.id))
        flow.current = Transmission(item=item, remaining_bits=item.size * 8.0)
        flow.current.seg_t0 = now
        flow.current.seg_b0 = 0.0

    def _rebalance(self, now: float) -> None:
        """Recompute all flow rates after a start/finish/idle transition.

        Settles every busy flow at its old rate first, then splits each link
        equally among the flows crossing it and gives each flow the minimum
        share along its path.
        """
        busy = [
            (dc, flow)
            for dc, flow in sorted(self.flows.items())
            if flow.alive and flow.current is not None
        ]
        for _dc, flow in busy:
            flow.current.settle(now)

        load: dict[tuple[str, str], int] = {}
        for _dc, flow in busy:
            for link in flow.links:
                key = (link.a, link.b)
                load[key] = load.get(key, 0) + 1

        usage: dict[tuple[str, str], float] = {}
        for dc, flow in busy:
            rate = min(link.capacity_bps / load[(link.a, link.b)] for link in flow.links)
            flow.rate = rate
            flow.note_rate(now, rate)
            for link in flow.links:
                key = (link.a, link.b)
                usage[key] = usage.get(key, 0.0) + rate
                assert usage[key] <= link.capacity_bps * (1.0 + RATE_EPS)
            tx = flow.current
            tx.open_segment(now, rate)
            flow.epoch += 1
            done_at = now + tx.remaining_bits / rate
            self.loop.schedule(done_at, EventKind.FLOW_UPDATE, (dc, flow.epoch))

    def _deliver(self, dc: str, tx: Transmission, now: float) -> None:
        account = self.accounts[dc]
        account.note_saved(tx.item, self.detection_at)
        assert account.saved_bytes <= account.stored_bytes
        count, lat_sum = item_packet_stats(tx.item.size, tx.segments, self.detection_at)
        account.packet_count += count
        account.packet_latency_sum_ms += lat_sum
        self._deliveries.append((dc, tx.item.id, now))
        if self._trace_on:
            self._delivery_segments.append(
                (dc, tx.item.id, tx.item.size, tuple(tx.segments))
            )

    # -- driving ------------------------------------------------------------

    def run(self) -> None:
        self.loop.run_until(self.attack_at)
        assert self.finished, "attack events must conclude the run"

    def trace(self) -> RunTrace:
        return RunTrace(
            store_ops=tuple(self._store_ops),
            deliveries=tuple(self._deliveries),
            delivery_segments=tuple(self._delivery_segments),
            events=tuple(self.loop.trace or ()),
        )

"""Per-run metrics and cross-replication statistics.

Three observables per threatened DC: the evacuated-data rate (saved bytes
over all bytes stored there by attack time), saved volume per SLA level,
and per-packet migration latency measured from the detection instant.
Replication means get 95% confidence intervals from the t distribution,
since six replications is far too few for a normal approximation.

Volumes are carried as integer bytes end to end; only rates, latencies,
and interval widths are floats.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from scipy import stats

from .policy import Policy

SLA_LEVELS = tuple(range(90, 100))
PACKET_BYTES = 1500


def evacuated_rate(saved: int, stored_total: int) -> float:
    """Percent of stored bytes that escaped before the attack."""
    if saved > stored_total:
        raise ValueError(f"saved {saved} exceeds stored {stored_total}: conservation bug")
    if stored_total == 0:
        return 0.0
    return 100.0 * saved / stored_total


def volume_by_priority(saved_bytes_by_sla: Mapping[int, int], policy: Policy) -> dict[int, int]:
    """Saved volume per reported priority level.

    The SLA policy reports items under their own level. The LIFO policy has
    no SLA ordering, so its entire saved volume is reported at level 99.
    """
    if policy is Policy.SLA:
        return {level: saved_bytes_by_sla[level] for level in sorted(saved_bytes_by_sla)
                if saved_bytes_by_sla[level]}
    total = sum(saved_bytes_by_sla.values())
    return {99: total} if total else {}


def ci95(samples: Sequence[float]) -> tuple[float, float]:
    """Sample mean and 95% confidence half-width, t distribution, n-1 df."""
    n = len(samples)
    if n < 2:
        raise ValueError("need at least 2 samples for a confidence interval")
    mean = statistics.fmean(samples)
    s = statistics.stdev(samples)
    t = float(stats.t.ppf(0.975, n - 1))
    return mean, t * s / math.sqrt(n)


# -- packet latency, in closed form ----------------------------------------


def packet_count(size_bytes: int) -> int:
    """Packets an item splits into: 1500-byte units plus a final fragment."""
    return -(-size_bytes // PACKET_BYTES)


def item_packet_stats(
    size_bytes: int,
    segments: Iterable[tuple[float, float, float, float, float]],
    detection_at: float,
) -> tuple[int, float]:
    """Count an item's packets and sum their latencies without a packet loop.

    A segment (t0, t1, rate_bps, bytes_at_t0, bytes_at_t1) is a constant-rate
    stretch of the item's transmission. A packet is delivered when cumulative
    bytes first reach its end offset (1500·p, or the full size for the last
    fragment). Offsets inside one segment are evenly spaced in time, so each
    segment contributes an arithmetic series.

    Latency is milliseconds since the detection instant.
    """
    full = size_bytes // PACKET_BYTES
    fragment = size_bytes % PACKET_BYTES
    total_count = 0
    total_ms = 0.0
    for t0, _t1, rate, b0, b1 in segments:
        if rate <= 0.0 or b1 <= b0:
            continue
        secs_per_byte = 8.0 / rate
        p_lo = int(math.floor(b0 / PACKET_BYTES)) + 1
        p_hi = min(int(math.floor(b1 / PACKET_BYTES)), full)
        if p_hi >= p_lo:
            n = p_hi - p_lo + 1
            sum_offsets = PACKET_BYTES * (p_lo + p_hi) * n / 2.0
            sum_t = n * t0 + (sum_offsets - n * b0) * secs_per_byte
            total_ms += (sum_t - n * detection_at) * 1000.0
            total_count += n
        if fragment and b0 < size_bytes <= b1:
            t = t0 + (size_bytes - b0) * secs_per_byte
            total_ms += (t - detection_at) * 1000.0
            total_count += 1
    return total_count, total_ms


def expand_packet_latencies(
    size_bytes: int,
    segments: Iterable[tuple[float, float, float, float, float]],
    detection_at: float,
) -> list[float]:
    """Per-packet latencies, one by one. Oracle for item_packet_stats."""
    out: list[float] = []
    full = size_bytes // PACKET_BYTES
    fragment = size_bytes % PACKET_BYTES
    offsets = [PACKET_BYTES * (p + 1) for p in range(full)]
    if fragment:
        offsets.append(size_bytes)
    seg_list = list(segments)
    for offset in offsets:
        for t0, _t1, rate, b0, b1 in seg_list:
            if rate > 0.0 and b0 < offset <= b1:
                t = t0 + (offset - b0) * 8.0 / rate
                out.append((t - detection_at) * 1000.0)
                break
    return out


# -- per-run records --------------------------------------------------------


@dataclass(slots=True)
class DcMetrics:
    """Everything observed at one threatened DC in one run."""

    dc: str
    clients: int
    stored_bytes: int
    saved_bytes: int
    lost_bytes: int
    evacuated_rate_pct: float
    volume_by_priority: dict[int, int]
    saved_bytes_by_sla: dict[int, int] = field(default_factory=dict)
    saved_pre_detection_bytes_by_sla: dict[int, int] = field(default_factory=dict)
    stored_count_by_sla: dict[int, int] = field(default_factory=dict)
    saved_count_by_sla: dict[int, int] = field(default_factory=dict)
    packet_count: int = 0
    packet_latency_sum_ms: float = 0.0

    @property
    def mean_latency_ms(self) -> float | None:
        if self.packet_count == 0:
            return None
        return self.packet_latency_sum_ms / self.packet_count

    def to_dict(self) -> dict:
        return {
            "dc": self.dc,
            "clients": self.clients,
            "stored_bytes": self.stored_bytes,
            "saved_bytes": self.saved_bytes,
            "lost_bytes": self.lost_bytes,
            "evacuated_rate_pct": self.evacuated_rate_pct,
            "volume_by_priority": {str(k): v for k, v in sorted(self.volume_by_priority.items())},
            "saved_bytes_by_sla": {str(k): v for k, v in sorted(self.saved_bytes_by_sla.items())},
            "saved_pre_detection_bytes_by_sla": {
                str(k): v for k, v in sorted(self.saved_pre_detection_bytes_by_sla.items())
            },
            "stored_count_by_sla": {str(k): v for k, v in sorted(self.stored_count_by_sla.items())},
            "saved_count_by_sla": {str(k): v for k, v in sorted(self.saved_count_by_sla.items())},
            "packet_count": self.packet_count,
            "packet_latency_sum_ms": self.packet_latency_sum_ms,
            "mean_latency_ms": self.mean_latency_ms,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DcMetrics":
        return cls(
            dc=d["dc"],
            clients=d["clients"],
            stored_bytes=d["stored_bytes"],
            saved_bytes=d["saved_bytes"],
            lost_bytes=d["lost_bytes"],
            evacuated_rate_pct=d["evacuated_rate_pct"],
            volume_by_priority={int(k): v for k, v in d["volume_by_priority"].items()},
            saved_bytes_by_sla={int(k): v for k, v in d["saved_bytes_by_sla"].items()},
            saved_pre_detection_bytes_by_sla={
                int(k): v for k, v in d["saved_pre_detection_bytes_by_sla"].items()
            },
            stored_count_by_sla={int(k): v for k, v in d["stored_count_by_sla"].items()},
            saved_count_by_sla={int(k): v for k, v in d["saved_count_by_sla"].items()},
            packet_count=d["packet_count"],
            packet_latency_sum_ms=d["packet_latency_sum_ms"],
        )


@dataclass(slots=True)
class RunMetrics:
    """One run's observations across its threatened DCs."""

    run_id: str
    seed: int
    policy: str
    bandwidth_gbps: float
    attack_at_s: float
    window_s: float
    per_dc: list[DcMetrics]

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "seed": self.seed,
            "policy": self.policy,
            "bandwidth_gbps": self.bandwidth_gbps,
            "attack_at_s": self.attack_at_s,
            "window_s": self.window_s,
            "per_dc": [m.to_dict() for m in self.per_dc],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunMetrics":
        return cls(
            run_id=d["run_id"],
            seed=d["seed"],
            policy=d["policy"],
            bandwidth_gbps=d["bandwidth_gbps"],
            attack_at_s=d["attack_at_s"],
            window_s=d["window_s"],
            per_dc=[DcMetrics.from_dict(m) for m in d["per_dc"]],
        )


CSV_HEADER = (
    ["run_id", "seed", "policy", "dc", "bandwidth_gbps", "clients",
     "saved_bytes", "stored_bytes", "evacuated_rate_pct"]
    + [f"vol_sla_{level}" for level in SLA_LEVELS]
    + ["mean_latency_ms"]
)


def csv_rows(run: RunMetrics) -> list[list[str]]:
    """One CSV row per threatened DC. Dot decimal separator, always."""
    rows = []
    for m in run.per_dc:
        mean = m.mean_latency_ms
        rows.append(
            [run.run_id, str(run.seed), run.policy, m.dc,
             _num(run.bandwidth_gbps), str(m.clients),
             str(m.saved_bytes), str(m.stored_bytes), repr(m.evacuated_rate_pct)]
            + [str(m.volume_by_priority.get(level, 0)) for level in SLA_LEVELS]
            + ["" if mean is None else repr(mean)]
        )
    return rows


def _num(x: float) -> str:
    """Render 5.0 as '5' but keep real fractions."""
    return str(int(x)) if float(x).is_integer() else repr(float(x))


GROUP_KEY = ("policy", "dc", "bandwidth_gbps", "clients")
SUMMARY_METRICS = ("saved_bytes", "stored_bytes", "evacuated_rate_pct", "mean_latency_ms")


def summarize(rows: Iterable[dict]) -> dict:
    """Group per-DC observations and attach mean, stddev, and 95% CI.

    Rows are grouped by (policy, dc, bandwidth, clients); each group is one
    scenario cell observed across replications. Groups with a single sample
    report the mean with the interval marked absent.
    """
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        key = tuple(row[k] for k in GROUP_KEY)
        groups.setdefault(key, []).append(row)

    out = []
    for key in sorted(groups, key=lambda k: tuple(str(x) for x in k)):
        members = sorted(groups[key], key=lambda r: str(r["run_id"]))
        entry: dict = dict(zip(GROUP_KEY, key))
        entry["n"] = len(members)
        entry["metrics"] = {}
        for metric in SUMMARY_METRICS:
            values = [float(r[metric]) for r in members
                      if r.get(metric) not in (None, "")]
            if not values:
                continue
            if len(values) >= 2:
                mean, half = ci95(values)
                stddev = statistics.stdev(values)
            else:
                mean, half, stddev = values[0], None, None
            entry["metrics"][metric] = {
                "n": len(values),
                "mean": mean,
                "stddev": stddev,
                "ci95_half_width": half,
            }
        out.append(entry)
    return {"groups": out}

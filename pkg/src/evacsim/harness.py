"""Experiment execution: the scenario matrix, replications, and result files.

A matrix is the cross product of bandwidth levels, client counts, policies,
and replication indices. Replication seeds derive from the master seed, and
the same derived seed drives both policies of a replication, so SLA and LIFO
always face identical workloads (paired comparison).

Runs are independent, so they can execute across processes; records are
merged by run id, which makes the output independent of scheduling.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import ScenarioSpec, resolve_topology
from .des import Distribution
from .engine import Simulation
from .factorial import DesignMatrix, Factor, sign_table
from .metrics import (
    CSV_HEADER,
    DcMetrics,
    RunMetrics,
    csv_rows,
    evacuated_rate,
    summarize,
    volume_by_priority,
)
from .policy import Policy

RUNS_CSV = "runs.csv"
SUMMARY_JSON = "summary.json"
SUMMARY_CSV = "summary.csv"
ERRORS_JSON = "errors.json"


@dataclass(frozen=True, slots=True)
class RunSpec:
    """Everything one run needs; safe to ship to a worker process."""

    run_id: str
    policy: Policy
    bandwidth_gbps: float
    clients_per_dc: tuple[tuple[str, int], ...]
    mean_interarrival_s: float
    size_dist: Distribution
    attack_at_s: float
    window_s: float
    risk_set: frozenset[str]
    topology_ref: str
    base_dir: str | None
    seed: int
    replication: int


@dataclass(frozen=True, slots=True)
class RunRecord:
    run_id: str
    metrics: RunMetrics | None
    error: str | None
    duration_s: float


def derive_seed(master_seed: int, replication: int) -> int:
    """Per-replication seed; stable, and independent across indices."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(replication,))
    return int(ss.generate_state(1, np.uint64)[0])


def _clients_sig(clients: dict[str, int]) -> str:
    counts = set(clients.values())
    if len(counts) == 1:
        return str(next(iter(counts)))
    return "-".join(f"{dc}.{n}" for dc, n in sorted(clients.items()))


def make_run_spec(
    scenario: ScenarioSpec,
    policy: Policy,
    seed: int,
    replication: int = 0,
    run_id: str | None = None,
    bandwidth_gbps: float | None = None,
    clients_per_dc: dict[str, int] | None = None,
    base_dir: str | None = None,
) -> RunSpec:
    bw = scenario.bandwidth_gbps if bandwidth_gbps is None else bandwidth_gbps
    clients = scenario.clients_per_dc if clients_per_dc is None else clients_per_dc
    if run_id is None:
        run_id = f"bw{bw:g}_cl{_clients_sig(clients)}_{policy.value}_r{replication:02d}"
    return RunSpec(
        run_id=run_id,
        policy=policy,
        bandwidth_gbps=bw,
        clients_per_dc=tuple(sorted(clients.items())),
        mean_interarrival_s=scenario.mean_interarrival_s,
        size_dist=scenario.size_dist,
        attack_at_s=scenario.attack_at_s,
        window_s=scenario.window_s,
        risk_set=scenario.risk_set,
        topology_ref=scenario.topology_ref,
        base_dir=base_dir,
        seed=seed,
        replication=replication,
    )


def build_matrix(
    scenario: ScenarioSpec,
    bandwidths_gbps: Sequence[float],
    clients_levels: Sequence[int],
    policies: Sequence[Policy],
    replications: int,
    base_dir: str | None = None,
) -> list[RunSpec]:
    """Full cross product; same replication seed pairs the two policies."""
    if not bandwidths_gbps or not clients_levels or not policies:
        raise ValueError("matrix level sets must be non-empty")
    if replications < 1:
        raise ValueError("need at least one replication")
    specs = []
    for bw in bandwidths_gbps:
        for count in clients_levels:
            clients = {dc: count for dc in sorted(scenario.risk_set)}
            for policy in policies:
                for rep in range(replications):
                    specs.append(
                        make_run_spec(
                            scenario,
                            policy,
                            seed=derive_seed(scenario.seed, rep),
                            replication=rep,
                            bandwidth_gbps=bw,
                            clients_per_dc=clients,
                            base_dir=base_dir,
                        )
                    )
    return specs


def execute(spec: RunSpec, trace: bool = False) -> tuple[RunMetrics, Simulation]:
    topo = resolve_topology(
        spec.topology_ref,
        spec.bandwidth_gbps,
        Path(spec.base_dir) if spec.base_dir else None,
    )
    sim = Simulation(
        topo=topo,
        policy=spec.policy,
        clients_per_dc=dict(spec.clients_per_dc),
        mean_interarrival=spec.mean_interarrival_s,
        size_dist=spec.size_dist,
        risk_set=set(spec.risk_set),
        attack_at=spec.attack_at_s,
        window=spec.window_s,
        seed=spec.seed,
        trace=trace,
    )
    sim.run()
    return collect_metrics(spec, sim), sim


def collect_metrics(spec: RunSpec, sim: Simulation) -> RunMetrics:
    clients = dict(spec.clients_per_dc)
    per_dc = []
    for dc in sorted(sim.accounts):
        acc = sim.accounts[dc]
        per_dc.append(
            DcMetrics(
                dc=dc,
                clients=clients.get(dc, 0),
                stored_bytes=acc.stored_bytes,
                saved_bytes=acc.saved_bytes,
                lost_bytes=acc.lost_bytes,
                evacuated_rate_pct=evacuated_rate(acc.saved_bytes, acc.stored_bytes),
                volume_by_priority=volume_by_priority(acc.saved_bytes_by_sla, spec.policy),
                saved_bytes_by_sla=dict(acc.saved_bytes_by_sla),
                saved_pre_detection_bytes_by_sla=dict(acc.saved_pre_detection_bytes_by_sla),
                stored_count_by_sla=dict(acc.stored_count_by_sla),
                saved_count_by_sla=dict(acc.saved_count_by_sla),
                packet_count=acc.packet_count,
                packet_latency_sum_ms=acc.packet_latency_sum_ms,
            )
        )
    return RunMetrics(
        run_id=spec.run_id,
        seed=spec.seed,
        policy=spec.policy.value,
        bandwidth_gbps=spec.bandwidth_gbps,
        attack_at_s=spec.attack_at_s,
        window_s=spec.window_s,
        per_dc=per_dc,
    )


def _execute_record(spec: RunSpec) -> RunRecord:
    start = time.perf_counter()
    try:
        metrics, _sim = execute(spec)
        return RunRecord(spec.run_id, metrics, None, time.perf_counter() - start)
    except Exception as exc:  # noqa: BLE001 - a bad run must not sink the batch
        return RunRecord(spec.run_id, None, f"{type(exc).__name__}: {exc}",
                         time.perf_counter() - start)


def run_all(
    specs: Sequence[RunSpec],
    workers: int = 1,
    out_dir: str | Path | None = None,
) -> list[RunRecord]:
    """Execute every spec; write per-run JSON incrementally, runs.csv at the end."""
    ids = [s.run_id for s in specs]
    if len(set(ids)) != len(ids):
        raise ValueError("run ids must be unique within a batch")
    out_path = Path(out_dir) if out_dir is not None else None
    if out_path is not None:
        out_path.mkdir(parents=True, exist_ok=True)

    records: list[RunRecord] = []
    if workers <= 1 or len(specs) <= 1:
        for spec in specs:
            record = _execute_record(spec)
            _persist_record(record, out_path)
            records.append(record)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_execute_record, spec): spec.run_id for spec in specs}
            for future in as_completed(futures):
                record = future.result()
                _persist_record(record, out_path)
                records.append(record)

    records.sort(key=lambda r: r.run_id)
    if out_path is not None:
        write_runs_csv(records, out_path / RUNS_CSV)
        errors = [
            {"run_id": r.run_id, "error": r.error} for r in records if r.error is not None
        ]
        if errors:
            _write_json(errors, out_path / ERRORS_JSON)
    return records


def _persist_record(record: RunRecord, out_path: Path | None) -> None:
    if out_path is None or record.metrics is None:
        return
    _write_json(record.metrics.to_dict(), out_path / f"run_{record.run_id}.json")


def _write_json(data, path: Path) -> None:
    path.write_text(
        json.dumps(data, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def write_runs_csv(records: Sequence[RunRecord], path: Path) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for record in sorted(records, key=lambda r: r.run_id):
            if record.metrics is None:
                continue
            for row in csv_rows(record.metrics):
                writer.writerow(row)


def rows_from_records(records: Sequence[RunRecord]) -> list[dict[str, str]]:
    """Per-DC rows exactly as a CSV round trip would produce them."""
    rows = []
    for record in sorted(records, key=lambda r: r.run_id):
        if record.metrics is None:
            continue
        for row in csv_rows(record.metrics):
            rows.append(dict(zip(CSV_HEADER, row)))
    return rows


def analyze_dir(in_dir: str | Path, out_dir: str | Path | None = None) -> dict:
    """Read runs.csv and write summary.json plus summary.csv alongside it."""
    in_path = Path(in_dir)
    runs_file = in_path / RUNS_CSV
    if not runs_file.exists():
        raise FileNotFoundError(f"no {RUNS_CSV} in {in_path}")
    with runs_file.open(encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    summary = summarize(rows)
    target = Path(out_dir) if out_dir is not None else in_path
    target.mkdir(parents=True, exist_ok=True)
    _write_json(summary, target / SUMMARY_JSON)
    write_summary_csv(summary, target / SUMMARY_CSV)
    return summary


def write_summary_csv(summary: dict, path: Path) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["policy", "dc", "bandwidth_gbps", "clients", "metric",
             "n", "mean", "stddev", "ci95_half_width"]
        )
        for group in summary["groups"]:
            for metric, cell in group["metrics"].items():
                writer.writerow(
                    [group["policy"], group["dc"], group["bandwidth_gbps"],
                     group["clients"], metric, cell["n"], repr(cell["mean"]),
                     "" if cell["stddev"] is None else repr(cell["stddev"]),
                     "" if cell["ci95_half_width"] is None else repr(cell["ci95_half_width"])]
                )


# -- 2^3 screening ----------------------------------------------------------

SCREENING_FACTORS = (
    Factor("A", "evacuation window s", 10.0, 20.0),
    Factor("B", "bandwidth Gbps", 1.0, 10.0),
    Factor("C", "active clients per DC", 20.0, 40.0),
)


def screening_specs(
    scenario: ScenarioSpec,
    factors: Sequence[Factor] = SCREENING_FACTORS,
    policy: Policy | None = None,
    base_dir: str | None = None,
) -> tuple[DesignMatrix, list[RunSpec]]:
    """One run per sign-table row, in Yates order, single replication."""
    if len(factors) != 3:
        raise ValueError("the screening design expects exactly 3 factors")
    window_f, bandwidth_f, clients_f = factors
    design = sign_table(3, ids=tuple(f.id for f in factors))
    pol = policy or scenario.policy or Policy.SLA
    seed = derive_seed(scenario.seed, 0)
    specs = []
    for i, row in enumerate(design.rows):
        window = window_f.high if row[0] > 0 else window_f.low
        bw = bandwidth_f.high if row[1] > 0 else bandwidth_f.low
        count = int(clients_f.high if row[2] > 0 else clients_f.low)
        specs.append(
            RunSpec(
                run_id=f"screen_{i}_bw{bw:g}_cl{count}_w{window:g}",
                policy=pol,
                bandwidth_gbps=bw,
                clients_per_dc=tuple(
                    (dc, count) for dc in sorted(scenario.risk_set)
                ),
                mean_interarrival_s=scenario.mean_interarrival_s,
                size_dist=scenario.size_dist,
                attack_at_s=max(scenario.attack_at_s, window),
                window_s=window,
                risk_set=scenario.risk_set,
                topology_ref=scenario.topology_ref,
                base_dir=base_dir,
                seed=seed,
                replication=0,
            )
        )
    return design, specs


def screening_responses(records: Sequence[RunRecord]) -> list[float]:
    """Response per design row: total saved megabytes across threatened DCs."""
    by_id = {r.run_id: r for r in records}
    responses = []
    for run_id in sorted(by_id, key=lambda s: int(s.split("_")[1])):
        record = by_id[run_id]
        if record.metrics is None:
            raise ValueError(f"screening run {run_id} failed: {record.error}")
        responses.append(sum(m.saved_bytes for m in record.metrics.per_dc) / 1e6)
    return responses

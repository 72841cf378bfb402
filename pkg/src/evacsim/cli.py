"""Command line interface.

Four subcommands: run, matrix, analyze, factorial. Each executes in process
by default; with --server URL it becomes a thin client that POSTs the same
payload to a running service and writes the same files from the response.

Exit codes: 0 on success, 1 on config or validation errors, 2 on usage
errors (from argparse).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import yaml

from .config import ConfigError, load_config
from .harness import (
    RUNS_CSV,
    RunRecord,
    analyze_dir,
    rows_from_records,
    write_runs_csv,
    write_summary_csv,
)
from .metrics import RunMetrics
from .service import ops


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evacsim",
        description="Simulate priority-driven data evacuation from data centers under attack alert.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one scenario")
    p_run.add_argument("--config", required=True, help="scenario YAML file")
    p_run.add_argument("--policy", choices=["sla", "lifo"], help="override the config policy")
    p_run.add_argument("--seed", type=int, help="override the config seed")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--server", help="POST to a running service instead of running locally")
    p_run.set_defaults(func=cmd_run)

    p_matrix = sub.add_parser("matrix", help="execute the full scenario matrix")
    p_matrix.add_argument("--config", required=True, help="scenario YAML with a matrix section")
    p_matrix.add_argument("--replications", type=int, help="override matrix replications")
    p_matrix.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p_matrix.add_argument("--out", required=True, help="output directory")
    p_matrix.add_argument("--server", help="POST to a running service instead of running locally")
    p_matrix.set_defaults(func=cmd_matrix)

    p_analyze = sub.add_parser("analyze", help="summarize a results directory")
    p_analyze.add_argument("--in", dest="in_dir", required=True, help="directory with runs.csv")
    p_analyze.add_argument("--out", help="where to write summaries (default: --in)")
    p_analyze.add_argument("--server", help="POST to a running service instead of running locally")
    p_analyze.set_defaults(func=cmd_analyze)

    p_fact = sub.add_parser("factorial", help="allocation of variation for a 2^k design")
    p_fact.add_argument("--responses", required=True,
                        help="YAML/JSON file with factors and responses in sign-table order")
    p_fact.add_argument("--out", help="directory for variation.csv (optional)")
    p_fact.add_argument("--server", help="POST to a running service instead of running locally")
    p_fact.set_defaults(func=cmd_factorial)
    return parser


def _post(server: str, route: str, payload: dict) -> dict:
    import httpx

    url = server.rstrip("/") + route
    response = httpx.post(url, json=payload, timeout=600.0)
    if response.status_code != 200:
        detail = response.text
        try:
            detail = response.json().get("detail", detail)
        except Exception:  # noqa: BLE001 - error body may not be JSON
            pass
        raise ConfigError(f"{url} returned {response.status_code}: {detail}")
    return response.json()


def _read_config_dict(path: str) -> dict:
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def cmd_run(args) -> int:
    scenario, _matrix = load_config(args.config)
    base_dir = str(Path(args.config).resolve().parent)
    out = Path(args.out)
    if args.server:
        raw = _read_config_dict(args.config)
        raw.pop("matrix", None)
        payload = {"scenario": raw, "policy": args.policy, "seed": args.seed}
        metrics = RunMetrics.from_dict(_post(args.server, "/run", payload)["metrics"])
    else:
        metrics = ops.run_op(scenario, policy=args.policy, seed=args.seed, base_dir=base_dir)
    out.mkdir(parents=True, exist_ok=True)
    record = RunRecord(metrics.run_id, metrics, None, 0.0)
    (out / f"run_{metrics.run_id}.json").write_text(
        json.dumps(metrics.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    write_runs_csv([record], out / RUNS_CSV)
    saved = sum(m.saved_bytes for m in metrics.per_dc)
    stored = sum(m.stored_bytes for m in metrics.per_dc)
    print(f"{metrics.run_id}: saved {saved} of {stored} stored bytes "
          f"({', '.join(f'{m.dc} {m.evacuated_rate_pct:.1f}%' for m in metrics.per_dc)})")
    print(f"wrote {out / RUNS_CSV}")
    return 0


def cmd_matrix(args) -> int:
    scenario, matrix = load_config(args.config)
    if matrix is None:
        raise ConfigError(f"{args.config}: no matrix section")
    base_dir = str(Path(args.config).resolve().parent)
    out = Path(args.out)
    started = time.perf_counter()
    if args.server:
        raw = _read_config_dict(args.config)
        matrix_data = raw.pop("matrix")
        payload = {
            "scenario": raw,
            "matrix": matrix_data,
            "replications": args.replications,
            "workers": args.workers,
        }
        body = _post(args.server, "/matrix", payload)
        records = [
            RunRecord(m["run_id"], RunMetrics.from_dict(m), None, 0.0) for m in body["runs"]
        ] + [RunRecord(e["run_id"], None, e["error"], 0.0) for e in body["errors"]]
        records.sort(key=lambda r: r.run_id)
        out.mkdir(parents=True, exist_ok=True)
        for record in records:
            if record.metrics is not None:
                (out / f"run_{record.run_id}.json").write_text(
                    json.dumps(record.metrics.to_dict(), sort_keys=True, indent=2) + "\n",
                    encoding="utf-8",
                )
        write_runs_csv(records, out / RUNS_CSV)
    else:
        records = ops.matrix_op(
            scenario,
            {
                "bandwidths_gbps": list(matrix.bandwidths_gbps),
                "clients": list(matrix.clients),
                "policies": [p.value for p in matrix.policies],
                "replications": matrix.replications,
            },
            replications=args.replications,
            workers=args.workers,
            out_dir=str(out),
            base_dir=base_dir,
        )
    elapsed = time.perf_counter() - started
    failed = [r for r in records if r.error is not None]
    print(f"{len(records)} runs ({len(failed)} failed) in {elapsed:.1f}s; wrote {out / RUNS_CSV}")
    for record in failed:
        print(f"  failed {record.run_id}: {record.error}", file=sys.stderr)
    return 0


def cmd_analyze(args) -> int:
    in_dir = Path(args.in_dir)
    if args.server:
        import csv as csv_mod

        runs_file = in_dir / RUNS_CSV
        if not runs_file.exists():
            raise FileNotFoundError(f"no {RUNS_CSV} in {in_dir}")
        with runs_file.open(encoding="utf-8", newline="") as fh:
            rows = list(csv_mod.DictReader(fh))
        summary = _post(args.server, "/analyze", {"rows": rows})["summary"]
        target = Path(args.out) if args.out else in_dir
        target.mkdir(parents=True, exist_ok=True)
        (target / "summary.json").write_text(
            json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
        write_summary_csv(summary, target / "summary.csv")
    else:
        summary = analyze_dir(in_dir, args.out)
        target = Path(args.out) if args.out else in_dir
    print(f"{len(summary['groups'])} groups; wrote {target / 'summary.json'}")
    return 0


def cmd_factorial(args) -> int:
    data = _read_config_dict(args.responses)
    factors = data.get("factors")
    responses = data.get("responses")
    if not isinstance(factors, list) or not isinstance(responses, list):
        raise ConfigError(f"{args.responses}: need 'factors' and 'responses' lists")
    if args.server:
        result = _post(args.server, "/factorial", {"factors": factors, "responses": responses})
    else:
        result = ops.factorial_op(factors, [float(r) for r in responses])
    print(result["report"])
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "variation.csv"
        lines = ["effect,coefficient,impact_pct"]
        impacts = result["impacts"]
        effect_map = result["effects"]
        for label in sorted(impacts, key=lambda e: (-impacts[e], e)):
            lines.append(f"{label},{effect_map[label]!r},{impacts[label]!r}")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

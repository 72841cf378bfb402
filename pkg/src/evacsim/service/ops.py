"""Operations behind both the HTTP endpoints and the in-process CLI path.

Each op takes plain validated data, runs the core package, and returns
JSON-ready structures. Keeping them free of FastAPI lets the CLI call them
directly without a server.
"""

from __future__ import annotations

from ..config import ConfigError, ScenarioSpec, load_matrix, load_scenario
from ..factorial import (
    Factor,
    allocation_of_variation,
    effects,
    render_report,
    sign_table,
)
from ..harness import (
    RunRecord,
    build_matrix,
    derive_seed,
    execute,
    make_run_spec,
    run_all,
)
from ..metrics import RunMetrics, summarize
from ..policy import Policy


def scenario_from_dict(data: dict, ctx: str = "scenario") -> ScenarioSpec:
    return load_scenario(data, ctx=ctx)


def run_op(
    scenario: ScenarioSpec,
    policy: str | None = None,
    seed: int | None = None,
    base_dir: str | None = None,
) -> RunMetrics:
    """Execute one scenario under one policy."""
    chosen = Policy.parse(policy) if policy else scenario.policy
    if chosen is None:
        raise ConfigError("no policy given: set 'policy' in the config or pass one explicitly")
    spec = make_run_spec(
        scenario,
        chosen,
        seed=scenario.seed if seed is None else seed,
        base_dir=base_dir,
    )
    metrics, _sim = execute(spec)
    return metrics


def matrix_op(
    scenario: ScenarioSpec,
    matrix_data: dict,
    replications: int | None = None,
    workers: int = 1,
    out_dir: str | None = None,
    base_dir: str | None = None,
) -> list[RunRecord]:
    """Execute the full scenario matrix; optionally persist to out_dir."""
    matrix = load_matrix(matrix_data)
    reps = matrix.replications if replications is None else replications
    if reps < 1:
        raise ConfigError("replications must be >= 1")
    specs = build_matrix(
        scenario,
        matrix.bandwidths_gbps,
        matrix.clients,
        matrix.policies,
        reps,
        base_dir=base_dir,
    )
    return run_all(specs, workers=workers, out_dir=out_dir)


def analyze_rows_op(rows: list[dict]) -> dict:
    return summarize(rows)


def factorial_op(factors_data: list[dict], responses: list[float]) -> dict:
    """Variation report from a responses vector in Yates order."""
    if not factors_data:
        raise ConfigError("factorial: need at least one factor")
    try:
        factors = [
            Factor(str(f["id"]), str(f.get("name", f["id"])),
                   float(f["low"]), float(f["high"]))
            for f in factors_data
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"factorial: bad factor spec: {exc}") from exc
    design = sign_table(len(factors), ids=tuple(f.id for f in factors))
    expected = 2 ** len(factors)
    if len(responses) != expected:
        raise ConfigError(
            f"factorial: expected {expected} responses in sign-table order, "
            f"got {len(responses)}"
        )
    effect_map = effects(design, responses)
    try:
        impacts = allocation_of_variation(effect_map)
    except ValueError as exc:
        raise ConfigError(f"factorial: {exc}") from exc
    return {
        "effects": effect_map,
        "impacts": impacts,
        "report": render_report(factors, design, responses),
    }


__all__ = [
    "scenario_from_dict",
    "run_op",
    "matrix_op",
    "analyze_rows_op",
    "factorial_op",
    "derive_seed",
]

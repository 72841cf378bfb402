"""FastAPI application exposing the simulator over HTTP.

Run with: uvicorn evacsim.service.app:app
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..config import ConfigError
from .ops import analyze_rows_op, factorial_op, matrix_op, run_op, scenario_from_dict
from .schemas import (
    AnalyzeRequest,
    AnalyzeResponse,
    FactorialRequest,
    FactorialResponse,
    HealthResponse,
    MatrixRequest,
    MatrixResponse,
    RunRequest,
    RunResponse,
)

app = FastAPI(
    title="evacsim",
    description="Priority-driven data evacuation simulator for data centers under attack alert.",
    version=__version__,
)


def _scenario(model) -> "ScenarioSpec":  # noqa: F821 - annotation for readers
    try:
        return scenario_from_dict(model.model_dump(), ctx="request.scenario")
    except ConfigError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


@app.get("/healthz", response_model=HealthResponse)
def healthz() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/run", response_model=RunResponse)
def run(req: RunRequest) -> RunResponse:
    scenario = _scenario(req.scenario)
    try:
        metrics = run_op(scenario, policy=req.policy, seed=req.seed)
    except (ConfigError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return RunResponse(metrics=metrics.to_dict())


@app.post("/matrix", response_model=MatrixResponse)
def matrix(req: MatrixRequest) -> MatrixResponse:
    scenario = _scenario(req.scenario)
    try:
        records = matrix_op(
            scenario,
            req.matrix.model_dump(),
            replications=req.replications,
            workers=req.workers,
        )
    except (ConfigError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return MatrixResponse(
        runs=[r.metrics.to_dict() for r in records if r.metrics is not None],
        errors=[{"run_id": r.run_id, "error": r.error} for r in records if r.error],
    )


@app.post("/analyze", response_model=AnalyzeResponse)
def analyze(req: AnalyzeRequest) -> AnalyzeResponse:
    try:
        summary = analyze_rows_op(req.rows)
    except (ConfigError, ValueError, KeyError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return AnalyzeResponse(summary=summary)


@app.post("/factorial", response_model=FactorialResponse)
def factorial(req: FactorialRequest) -> FactorialResponse:
    try:
        result = factorial_op([f.model_dump() for f in req.factors], req.responses)
    except (ConfigError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return FactorialResponse(**result)

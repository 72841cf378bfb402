"""Request and response bodies for the HTTP API."""

from __future__ import annotations

from pydantic import BaseModel, Field


class ScenarioModel(BaseModel):
    topology: str = "canonical"
    bandwidth_gbps: float
    clients_per_dc: int | dict[str, int]
    mean_interarrival_s: float
    item_size: dict = Field(default_factory=lambda: {"constant_bytes": 1_500_000})
    attack_at_s: float
    window_s: float
    risk_set: list[str]
    policy: str | None = None
    seed: int = 0


class MatrixModel(BaseModel):
    bandwidths_gbps: list[float]
    clients: list[int]
    policies: list[str] = ["sla", "lifo"]
    replications: int = 6


class RunRequest(BaseModel):
    scenario: ScenarioModel
    policy: str | None = None
    seed: int | None = None


class RunResponse(BaseModel):
    metrics: dict


class MatrixRequest(BaseModel):
    scenario: ScenarioModel
    matrix: MatrixModel
    replications: int | None = None
    workers: int = 1


class MatrixResponse(BaseModel):
    runs: list[dict]
    errors: list[dict]


class AnalyzeRequest(BaseModel):
    rows: list[dict[str, str]]


class AnalyzeResponse(BaseModel):
    summary: dict


class FactorModel(BaseModel):
    id: str
    name: str
    low: float
    high: float


class FactorialRequest(BaseModel):
    factors: list[FactorModel]
    responses: list[float]


class FactorialResponse(BaseModel):
    effects: dict[str, float]
    impacts: dict[str, float]
    report: str


class HealthResponse(BaseModel):
    status: str
    version: str

"""Request and response bodies for the HTTP endpoints."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class SimulateRequest(BaseModel):
    config: dict[str, Any]
    n_events: int = Field(ge=1)
    seed: Optional[int] = None


class SimulateResponse(BaseModel):
    csv: str
    summary: dict[str, Any]
    seed: int


class SpectralRequest(BaseModel):
    config: dict[str, Any]


class SpectralResponse(BaseModel):
    rho: float
    kappa: list[float]
    m: list[float]
    verdict: str


class FirstJumpRequest(BaseModel):
    config: dict[str, Any]
    times: list[float]


class FirstJumpPoint(BaseModel):
    time: float
    survival: float
    quadrature_used: bool


class FirstJumpResponse(BaseModel):
    results: list[FirstJumpPoint]


class PerfectRequest(BaseModel):
    config: dict[str, Any]
    neuron: int
    samples: int = Field(ge=1)
    seed: Optional[int] = None
    cap: int = Field(default=10**6, ge=1)
    workers: Optional[int] = Field(default=None, ge=1)


class PerfectResponse(BaseModel):
    csv: str
    summary: dict[str, Any]
    failures: int
    seed: int


class ContourRequest(BaseModel):
    delta: Optional[float] = None
    beta_min: Optional[float] = None
    beta_max: Optional[float] = None


class ContourResponse(BaseModel):
    delta: float
    phi: Optional[float] = None
    domain_error: Optional[str] = None
    branching_verdict: str


class DriftRequest(BaseModel):
    config: dict[str, Any]
    state: Optional[list[float]] = None


class DriftResponse(BaseModel):
    exact: float
    bound: float
    rho: float


class HealthResponse(BaseModel):
    status: str
    version: str

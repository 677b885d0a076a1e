"""Endpoint implementations binding the HTTP layer to the core modules."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import ConfigError, DomainError, InhibnetError
from ..flow import first_jump_survival
from ..model import model_from_config, require_valid
from ..pdmp import simulate, trajectory_csv, trajectory_summary
from ..perfect import (
    branching_domination_check,
    contour_bound,
    delta_from_bounds,
    draw_stationary,
    sample_csv,
)
from ..spectral import build_H, drift_of_lyapunov, non_evanescence_verdict
from ..stats import summary as sample_summary
from . import schemas


def _load_model(config: dict, seed_override=None):
    model, config_seed = model_from_config(config)
    require_valid(model)
    seed = seed_override if seed_override is not None else config_seed
    return model, seed


def _require_seed(seed) -> int:
    if seed is None:
        raise ConfigError("a seed is required, either in the config or the request")
    return int(seed)


def _nearest_neighbor_verdict(delta_value: float) -> str:
    # two in-neighbors on the line: b = 2(beta_sup - beta_star) < beta_star
    # is exactly delta > 2
    return "subcritical" if delta_value > 2.0 else "inconclusive"


def create_app() -> FastAPI:
    app = FastAPI(title="inhibnet", version=__version__)

    @app.exception_handler(ConfigError)
    async def _config_error(request: Request, exc: ConfigError):
        return JSONResponse(
            status_code=400,
            content={"detail": str(exc), "violations": exc.violations},
        )

    @app.exception_handler(InhibnetError)
    async def _runtime_error(request: Request, exc: InhibnetError):
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    async def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/simulate", response_model=schemas.SimulateResponse)
    async def simulate_endpoint(req: schemas.SimulateRequest):
        model, seed = _load_model(req.config, req.seed)
        seed = _require_seed(seed)
        traj = simulate(model, req.n_events, seed)
        return schemas.SimulateResponse(
            csv=trajectory_csv(traj), summary=trajectory_summary(traj), seed=seed
        )

    @app.post("/spectral", response_model=schemas.SpectralResponse)
    async def spectral_endpoint(req: schemas.SpectralRequest):
        model, _ = _load_model(req.config)
        h = build_H(model)
        verdict = non_evanescence_verdict(h)
        return schemas.SpectralResponse(
            rho=h.rho,
            kappa=[float(v) for v in h.kappa],
            m=[float(v) for v in h.m],
            verdict=verdict.kind,
        )

    @app.post("/first-jump", response_model=schemas.FirstJumpResponse)
    async def first_jump_endpoint(req: schemas.FirstJumpRequest):
        model, _ = _load_model(req.config)
        if not req.times:
            raise ConfigError("at least one time is required")
        if any(t < 0 for t in req.times):
            raise ConfigError("times must be nonnegative")
        results = []
        for t in req.times:
            s = first_jump_survival(model, t)
            results.append(
                schemas.FirstJumpPoint(
                    time=t, survival=s.value, quadrature_used=s.quadrature_used
                )
            )
        return schemas.FirstJumpResponse(results=results)

    @app.post("/perfect", response_model=schemas.PerfectResponse)
    async def perfect_endpoint(req: schemas.PerfectRequest):
        model, seed = _load_model(req.config, req.seed)
        seed = _require_seed(seed)
        samples = draw_stationary(
            model, req.neuron, req.samples, seed, cap=req.cap, workers=req.workers
        )
        return schemas.PerfectResponse(
            csv=sample_csv(samples),
            summary=sample_summary(samples.values) if len(samples.values) else {},
            failures=samples.failures,
            seed=seed,
        )

    @app.post("/contour", response_model=schemas.ContourResponse)
    async def contour_endpoint(req: schemas.ContourRequest):
        has_bounds = req.beta_min is not None and req.beta_max is not None
        if (req.delta is None) == (not has_bounds):
            raise ConfigError("give either delta or both beta_min and beta_max")
        d = req.delta if req.delta is not None else delta_from_bounds(req.beta_min, req.beta_max)
        try:
            phi, domain_error = contour_bound(d), None
        except DomainError as exc:
            phi, domain_error = None, str(exc)
        return schemas.ContourResponse(
            delta=d,
            phi=phi,
            domain_error=domain_error,
            branching_verdict=_nearest_neighbor_verdict(d),
        )

    @app.post("/drift", response_model=schemas.DriftResponse)
    async def drift_endpoint(req: schemas.DriftRequest):
        model, _ = _load_model(req.config)
        state = req.state if req.state is not None else model.initial_state
        if state is None:
            raise ConfigError("a state is required, either in the config or the request")
        if model.n is not None and len(state) != model.n:
            raise ConfigError(f"state needs {model.n} entries, got {len(state)}")
        h = build_H(model)
        exact, bound = drift_of_lyapunov(model, h, state)
        return schemas.DriftResponse(exact=exact, bound=bound, rho=h.rho)

    return app


app = create_app()

"""FastAPI service wrapping the simulator: runs, sweeps, baselines and the
exhaustive oracle as stateless endpoints."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, analysis, runner
from ..errors import ConfigError, JointSpaceTooLargeError
from ..runner import RunResult
from . import schemas


def _summary_payload(result: RunResult) -> schemas.SummaryPayload:
    return schemas.SummaryPayload.model_validate(runner.summary_to_dict(result))


def _series_payload(result: RunResult) -> schemas.SeriesPayload:
    return schemas.SeriesPayload.model_validate(result.series.csv_columns())


def _run_payload(result: RunResult, include_series: bool) -> schemas.RunPayload:
    return schemas.RunPayload(
        seed=result.seed,
        summary=_summary_payload(result),
        series=_series_payload(result) if include_series else None,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="meshla", version=__version__)

    @app.exception_handler(ConfigError)
    @app.exception_handler(JointSpaceTooLargeError)
    @app.exception_handler(ValueError)
    async def _domain_error(request: Request, exc: Exception):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/simulate", response_model=schemas.SimulateResponse)
    def simulate(req: schemas.SimulateRequest):
        seeds = req.seeds if req.seeds else [req.config.engine.seed]
        results = runner.run_many(req.config, seeds)
        return schemas.SimulateResponse(
            runs=[_run_payload(r, req.include_series) for r in results]
        )

    @app.post("/sweep", response_model=schemas.SweepResponse)
    def sweep(req: schemas.SweepRequest):
        seeds = req.seeds if req.seeds else [req.config.engine.seed]
        result = runner.sweep(req.config, req.parameter, req.values, seeds)
        points = [
            schemas.SweepPointPayload(
                value=p.value,
                mean_delivered=p.mean_delivered,
                mean_connectivity=p.mean_connectivity,
                mean_interference=p.mean_interference,
                mean_switch_rate=p.mean_switch_rate,
                converged_fraction=p.converged_fraction,
                mean_delivered_trajectory=[float(x) for x in p.mean_delivered_trajectory],
                mean_connectivity_trajectory=[float(x) for x in p.mean_connectivity_trajectory],
            )
            for p in result.points
        ]
        flat = [
            schemas.SweepRunPayload(value=p.value, summary=_summary_payload(r))
            for p in result.points
            for r in p.runs
        ]
        return schemas.SweepResponse(
            parameter=result.parameter, seeds=result.seeds, points=points, runs=flat
        )

    @app.post("/baseline", response_model=schemas.SimulateResponse)
    def baseline(req: schemas.BaselineRequest):
        seeds = req.seeds if req.seeds else [req.config.engine.seed]
        results = runner.baseline(req.config, req.strategy, seeds)
        return schemas.SimulateResponse(
            runs=[_run_payload(r, req.include_series) for r in results]
        )

    @app.post("/oracle", response_model=schemas.OracleResponse)
    def oracle(req: schemas.OracleRequest):
        result = analysis.brute_force_oracle(
            req.config, eval_slots=req.eval_slots, eval_seeds=req.eval_seeds
        )
        return schemas.OracleResponse(
            selection=[
                schemas.NodeSelectionPayload(node=v, channels=list(s))
                for v, s in sorted(result.selection.items())
            ],
            mean_delivered=result.mean_delivered,
            assignments_evaluated=result.assignments_evaluated,
        )

    return app

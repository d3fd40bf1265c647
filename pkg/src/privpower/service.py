"""HTTP service wrapping the job runner.

Each endpoint returns the job's ResultRecord in its canonical byte form,
so a record fetched over HTTP is identical to one written by the CLI for
the same request. Infeasible and undefined-estimate conditions surface
as structured 422 responses with a machine-readable error class, not as
crashes.
"""

from __future__ import annotations

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from . import __version__
from .jobs import (
    run_compare_job,
    run_power_job,
    run_privstat_job,
    run_samplesize_job,
)
from .privhist import EstimateUndefinedError
from .powersim import InfeasibleSearchError
from .samplesize import InfeasibleCorrectionError
from .schemas import CompareRequest, PowerRequest, PrivStatRequest, SampleSizeRequest

app = FastAPI(title="privpower", version=__version__)


@app.exception_handler(InfeasibleCorrectionError)
@app.exception_handler(InfeasibleSearchError)
async def _infeasible(request: Request, exc: Exception) -> JSONResponse:
    return JSONResponse(status_code=422, content={"error": "infeasible", "message": str(exc)})


@app.exception_handler(EstimateUndefinedError)
async def _undefined(request: Request, exc: Exception) -> JSONResponse:
    return JSONResponse(
        status_code=422, content={"error": "estimate-undefined", "message": str(exc)}
    )


@app.exception_handler(ValueError)
async def _invalid(request: Request, exc: Exception) -> JSONResponse:
    return JSONResponse(status_code=422, content={"error": "invalid-config", "message": str(exc)})


def _record_response(record) -> Response:
    return Response(content=record.to_json(), media_type="application/json")


@app.get("/v1/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/v1/jobs/power")
def power(req: PowerRequest) -> Response:
    return _record_response(run_power_job(req))


@app.post("/v1/jobs/samplesize")
def samplesize(req: SampleSizeRequest) -> Response:
    return _record_response(run_samplesize_job(req))


@app.post("/v1/jobs/privstat")
def privstat(req: PrivStatRequest) -> Response:
    return _record_response(run_privstat_job(req))


@app.post("/v1/jobs/compare")
def compare(req: CompareRequest) -> Response:
    return _record_response(run_compare_job(req))

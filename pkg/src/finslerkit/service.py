"""HTTP front end: a FastAPI app exposing the job runners.

POST /v1/run takes a JobSpec document and returns the RunReport with
canonical serialization (so responses are byte-stable for identical
jobs).  Schema problems map to 422 with kind "schema"; evaluation-domain
problems (metric undefined at a point, singular data) map to 422 with
kind "domain".  Residual failures are not errors: they come back as a
200 report with status "fail".
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response

from . import __version__
from .errors import DomainError, FinslerKitError, InvalidSpec, SchemaError
from .jobs import SCHEMA_VERSION, run_job, validate_job, canonical_json

app = FastAPI(title="finslerkit", version=__version__)


def _error(status: int, kind: str, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"kind": kind, "detail": detail})


@app.exception_handler(RequestValidationError)
async def _on_request_validation(request: Request, exc: RequestValidationError):
    return _error(422, "schema", str(exc))


@app.exception_handler(SchemaError)
async def _on_schema(request: Request, exc: SchemaError):
    return _error(422, "schema", str(exc))


@app.exception_handler(InvalidSpec)
async def _on_invalid(request: Request, exc: InvalidSpec):
    return _error(422, "schema", str(exc))


@app.exception_handler(DomainError)
async def _on_domain(request: Request, exc: DomainError):
    return _error(422, "domain", str(exc))


@app.exception_handler(FinslerKitError)
async def _on_engine(request: Request, exc: FinslerKitError):
    return _error(422, "domain", str(exc))


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__, "schema_version": SCHEMA_VERSION}


@app.post("/v1/run")
def run(payload: dict) -> Response:
    spec = validate_job(payload)
    report = run_job(spec)
    return Response(content=canonical_json(report), media_type="application/json")

"""Thin client CLI.

``finslerkit --job job.json [--out report.json]`` posts the job to the
service and writes the report.  By default the FastAPI app is driven
in-process over an ASGI transport (no network, no server to start);
``--server URL`` targets a remote instance instead, and
``finslerkit serve`` starts one.

Exit codes: 0 all checks passed, 1 residual failures, 2 schema or
domain errors (including unreadable jobs and transport failures).
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from typing import Optional

import httpx


def _run_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="finslerkit", description="Run a finslerkit job.")
    p.add_argument("--job", required=True, help="path to the JobSpec JSON document")
    p.add_argument("--out", default=None, help="report output path (default: job's 'out' or stdout)")
    p.add_argument("--seed", type=int, default=None, help="override samples.seed")
    p.add_argument("--tol", type=float, default=None, help="override every check threshold")
    p.add_argument("--order", type=int, default=None, help="minimum jet truncation order")
    p.add_argument("--server", default=None, help="remote service URL (default: in-process)")
    return p


def _serve_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="finslerkit serve", description="Start the HTTP service.")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8439)
    return p


async def _post_inprocess(data: dict) -> tuple[int, bytes]:
    from .service import app

    transport = httpx.ASGITransport(app=app)
    async with httpx.AsyncClient(transport=transport, base_url="http://service") as client:
        resp = await client.post("/v1/run", json=data, timeout=None)
        return resp.status_code, resp.content


def _post_remote(server: str, data: dict) -> tuple[int, bytes]:
    with httpx.Client(base_url=server, timeout=600.0) as client:
        resp = client.post("/v1/run", json=data)
        return resp.status_code, resp.content


def _fail(message: str) -> int:
    print(f"finslerkit: {message}", file=sys.stderr)
    return 2


def run_command(argv: list[str]) -> int:
    args = _run_parser().parse_args(argv)
    try:
        with open(args.job, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as e:
        return _fail(f"cannot read job: {e}")
    except json.JSONDecodeError as e:
        return _fail(f"job is not valid JSON: {e}")
    if not isinstance(data, dict):
        return _fail("job document must be a JSON object")

    if args.seed is not None:
        data.setdefault("samples", {})["seed"] = args.seed
    if args.tol is not None:
        data["tol"] = args.tol
    if args.order is not None:
        data["order"] = args.order

    try:
        if args.server:
            status, body = _post_remote(args.server, data)
        else:
            status, body = asyncio.run(_post_inprocess(data))
    except httpx.HTTPError as e:
        return _fail(f"transport error: {e}")

    if status != 200:
        try:
            err = json.loads(body)
            detail = f"{err.get('kind', 'error')}: {err.get('detail', body.decode())}"
        except (json.JSONDecodeError, UnicodeDecodeError):
            detail = body.decode(errors="replace")
        return _fail(f"service returned {status} ({detail})")

    out_path: Optional[str] = args.out or data.get("out")
    if out_path:
        with open(out_path, "wb") as fh:
            fh.write(body)
    else:
        sys.stdout.buffer.write(body)

    report = json.loads(body)
    return 0 if report.get("status") == "pass" else 1


def serve_command(argv: list[str]) -> int:
    args = _serve_parser().parse_args(argv)
    try:
        import uvicorn
    except ImportError:
        return _fail("serving needs uvicorn: pip install 'finslerkit[server]'")
    from .service import app

    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] == "serve":
        return serve_command(argv[1:])
    return run_command(argv)


if __name__ == "__main__":
    sys.exit(main())

"""HTTP facade over the simulator for what-if clients.

Routes:
    GET  /api/health     liveness and version
    GET  /api/defaults   default scenario plus slider ranges for every control
    POST /api/simulate   run a scenario document, return series and summary

The service is stateless: each request builds its own model and generator
streams, so concurrent requests cannot interact. Scenario documents go
through exactly the same validator as the CLI loader; validation failures map
to 400 with the offending field path, a non-finite state to 422, and a run
longer than the step cap to 413.
"""

from __future__ import annotations

import argparse
import json
import secrets
import time
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .commerce import CLASS_ORDER, ScenarioRunResult, run_scenario
from .engine import NonFiniteStateError
from .metrics import MetricReport, build_report
from .scenario_io import (
    SCHEMA_VERSION,
    ScenarioError,
    adjustable_ranges,
    default_document,
    parse_scenario_document,
)

DEFAULT_STEP_CAP = 100_000

#: Generated seeds stay below 2**53 so JavaScript clients can round-trip them.
_SEED_BITS = 53


def _error_body(code: str, field: str, message: str) -> dict:
    return {"detail": [{"code": code, "field": field, "message": message}]}


def _downsample(series: np.ndarray, every: int) -> list[float]:
    return np.asarray(series)[::every].tolist()


def _series_payload(run: ScenarioRunResult, report: MetricReport, every: int) -> dict:
    classes = {}
    for cls in CLASS_ORDER:
        series = run.classes[cls]
        group = report.groups[cls.value]
        classes[cls.value] = {
            "arrivals": _downsample(series.arrivals, every),
            "browsing": _downsample(series.browsing, every),
            "in_cart": _downsample(series.in_cart, every),
            "payers": _downsample(series.payers, every),
            "exit_no_purchase": _downsample(series.exit_no_purchase, every),
            "exit_abandoned_cart": _downsample(series.exit_abandoned_cart, every),
            "revenue": _downsample(series.revenue, every),
            "cumulative_revenue": _downsample(group.cumulative_revenue, every),
            "buy_to_visit": _downsample(group.buy_to_visit, every),
            "revenue_throughput": _downsample(group.revenue_throughput, every),
            "potential_loss_throughput": _downsample(group.potential_loss_throughput, every),
        }
    aggregate_group = report.aggregate
    aggregate = {
        "revenue": _downsample(run.revenue, every),
        "cumulative_revenue": _downsample(aggregate_group.cumulative_revenue, every),
        "buy_to_visit": _downsample(aggregate_group.buy_to_visit, every),
        "revenue_throughput": _downsample(aggregate_group.revenue_throughput, every),
        "potential_loss_throughput": _downsample(aggregate_group.potential_loss_throughput, every),
    }
    return {"classes": classes, "aggregate": aggregate}


def create_app(step_cap: int = DEFAULT_STEP_CAP, cors: bool = False,
               ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="stockflow", version=__version__, docs_url=None, redoc_url=None)

    if cors:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=["*"],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.get("/api/defaults")
    def defaults() -> dict:
        document = default_document()
        return {
            "schema_version": SCHEMA_VERSION,
            "scenario": document["scenario"],
            "reference_bands": document.get("reference_bands"),
            "ranges": adjustable_ranges(),
        }

    @app.post("/api/simulate")
    async def simulate(request: Request):
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return JSONResponse(status_code=400,
                                content=_error_body("PARSE_ERROR", "body", exc.msg))
        if not isinstance(body, dict):
            return JSONResponse(status_code=400,
                                content=_error_body("PARSE_ERROR", "body", "expected a JSON object"))

        unknown = set(body) - {"scenario", "seed", "downsample_every"}
        if unknown:
            return JSONResponse(status_code=400,
                                content=_error_body("UNKNOWN_FIELD", sorted(unknown)[0],
                                                    "not part of the simulate request"))

        seed = body.get("seed")
        if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)
                                 or not 0 <= seed < 2**64):
            return JSONResponse(status_code=400,
                                content=_error_body("RANGE_VIOLATION", "seed",
                                                    "seed must be an unsigned 64-bit integer"))

        every = body.get("downsample_every", 1)
        if not isinstance(every, int) or isinstance(every, bool) or every < 1:
            return JSONResponse(status_code=400,
                                content=_error_body("RANGE_VIOLATION", "downsample_every",
                                                    "must be an integer >= 1"))

        try:
            scenario = parse_scenario_document(body.get("scenario", {}))
        except ScenarioError as exc:
            return JSONResponse(status_code=400,
                                content=_error_body(exc.code, exc.field, exc.detail))

        if scenario.sim.n_steps > step_cap:
            return JSONResponse(
                status_code=413,
                content=_error_body("STEP_CAP", "scenario.sim.horizon",
                                    f"{scenario.sim.n_steps} steps exceeds the cap of {step_cap}"),
            )

        seed_used = seed if seed is not None else secrets.randbits(_SEED_BITS)
        started = time.perf_counter()
        try:
            run = run_scenario(scenario, seed=seed_used)
        except NonFiniteStateError as exc:
            return JSONResponse(status_code=422,
                                content=_error_body("NONFINITE_STATE", exc.culprit, str(exc)))
        report = build_report(run)
        elapsed_ms = (time.perf_counter() - started) * 1000.0

        payload = {
            "seed_used": seed_used,
            "run_millis": elapsed_ms,
            "times": _downsample(run.times, every),
            "summary": report.summary(),
        }
        payload.update(_series_payload(run, report, every))
        return payload

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(prog="stockflow-service",
                                     description="HTTP facade over the scenario simulator.")
    parser.add_argument("--listen", default="127.0.0.1:8080", help="bind address (default %(default)s)")
    parser.add_argument("--cors", action="store_true", help="send permissive cross-origin headers")
    parser.add_argument("--step-cap", type=int, default=DEFAULT_STEP_CAP,
                        help="reject runs longer than this many steps (default %(default)s)")
    parser.add_argument("--ui-dir", default=None, help="serve this directory under /ui")
    args = parser.parse_args(argv)

    host, _, port = args.listen.rpartition(":")
    if not host or not port.isdigit():
        parser.error(f"--listen expects host:port, got {args.listen!r}")

    import uvicorn

    app = create_app(step_cap=args.step_cap, cors=args.cors, ui_dir=args.ui_dir)
    uvicorn.run(app, host=host, port=int(port), log_level="warning")


if __name__ == "__main__":
    main()

"""Read-only HTTP facade over fitted artifacts for the interactive simulator.

All state is loaded once at startup and never mutated; every endpoint is a
pure lookup. Guardrail outcomes (no detectable effect, unsupported query,
implausible input) are ordinary 200 responses with a status field so the
client renders them as messages, not transport failures.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import __version__
from .model import LongitudinalModel
from .simulator import EffectBundle, SimQuery, Simulator, UnknownVariable

API_VERSION = "v1"


@dataclass(frozen=True)
class ServiceState:
    model: LongitudinalModel
    bundle: EffectBundle
    simulator: Simulator
    motif: dict | None = None


def load_state(artifact_dir) -> ServiceState:
    model = LongitudinalModel.load(os.path.join(artifact_dir, "model.json"))
    bundle = EffectBundle.load(os.path.join(artifact_dir, "bundle.json"))
    motif = None
    motif_path = os.path.join(artifact_dir, "motif.json")
    if os.path.exists(motif_path):
        with open(motif_path, encoding="utf-8") as fh:
            motif = json.load(fh)
    return ServiceState(model=model, bundle=bundle, simulator=Simulator(bundle, model), motif=motif)


def _parse_query(body) -> SimQuery:
    if not isinstance(body, dict):
        raise HTTPException(status_code=400, detail="request body must be a JSON object")
    required = ("baseline", "source", "target", "horizon")
    missing = [k for k in required if k not in body]
    if missing:
        raise HTTPException(status_code=400, detail=f"missing fields: {', '.join(missing)}")
    if not isinstance(body["baseline"], dict):
        raise HTTPException(status_code=400, detail="baseline must map variable names to values")
    try:
        horizon = int(body["horizon"])
    except (TypeError, ValueError):
        raise HTTPException(status_code=400, detail="horizon must be an integer") from None

    def _optional_number(key):
        if key not in body or body[key] is None:
            return None
        try:
            return float(body[key])
        except (TypeError, ValueError):
            raise HTTPException(status_code=400, detail=f"{key} must be numeric") from None

    return SimQuery(
        mode=str(body.get("mode", "")),
        baseline=body["baseline"],
        source=str(body["source"]),
        target=str(body["target"]),
        horizon=horizon,
        forward_value=_optional_number("forward_value"),
        desired_target=_optional_number("desired_target"),
    )


def create_app(artifact_dir=None, cors_origins=("*",)) -> FastAPI:
    app = FastAPI(title="wlingam effect service", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )
    app.state.service = load_state(artifact_dir) if artifact_dir else None

    def state() -> ServiceState:
        if app.state.service is None:
            raise HTTPException(status_code=503, detail="artifacts not loaded")
        return app.state.service

    @app.get("/model/meta")
    def model_meta():
        st = state()
        schema = st.model.schema
        return {
            "version": API_VERSION,
            "variables": [
                {"name": v.name, "role": v.role.value, "binary": v.binary}
                for v in schema.variables
            ],
            "time_labels": list(schema.time_labels),
            "anchor_time": st.bundle.anchor_time,
            "horizons": list(st.bundle.lags),
            "sources": list(st.bundle.sources),
            "targets": list(st.bundle.targets),
            "bounds": st.bundle.bounds,
            "manifest": {
                "schema_hash": st.model.schema_hash,
                "mask_hash": st.model.mask_hash,
                "model_hash": st.model.content_hash(),
                "library_version": __version__,
            },
        }

    async def _simulate(request: Request, runner):
        st = state()
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(status_code=400, detail="body is not valid JSON") from None
        query = _parse_query(body)
        try:
            answer = runner(st.simulator, query)
        except UnknownVariable as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return JSONResponse(answer.to_dict())

    @app.post("/simulate/forward")
    async def simulate_forward(request: Request):
        return await _simulate(request, lambda sim, q: sim.forward_query(q))

    @app.post("/simulate/goal")
    async def simulate_goal(request: Request):
        return await _simulate(request, lambda sim, q: sim.goal_seek(q))

    @app.get("/effects")
    def effects(source: str, target: str, lags: str | None = None):
        st = state()
        wanted = st.bundle.lags if lags is None else tuple(int(x) for x in lags.split(","))
        rows = []
        for lag in wanted:
            if lag not in st.bundle.lags:
                raise HTTPException(status_code=422, detail=f"horizon {lag} not precomputed")
            try:
                point, lo, hi, uncertain = st.bundle.cell(source, target, lag)
            except UnknownVariable as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from None
            rows.append(
                {
                    "lag": lag,
                    "point": point,
                    "ci_low": lo,
                    "ci_high": hi,
                    "includes_zero": uncertain,
                }
            )
        return {"source": source, "target": target, "rows": rows}

    @app.get("/motif")
    def motif():
        st = state()
        if st.motif is None:
            raise HTTPException(status_code=404, detail="no motif artifact loaded")
        return st.motif

    return app


def serve(artifact_dir, host: str = "127.0.0.1", port: int = 8712, cors_origins=("*",)) -> None:
    import uvicorn

    app = create_app(artifact_dir, cors_origins=cors_origins)
    uvicorn.run(app, host=host, port=port, log_level="warning")

"""HTTP prediction service: health, flow prediction, comfort maps."""

from __future__ import annotations

import base64
import json
import os
import struct
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from windcomfort.comfort import (
    ComfortCriteria,
    SECTOR_CCW_DEG,
    WindRose,
    comfort_map,
    predict_direction,
)
from windcomfort.errors import InvalidScene, UnnormalizedRose, UnsupportedAngle, WindcomfortError
from windcomfort.raster.dataset import WGF_MAGIC
from windcomfort.raster.grid import FieldGrid, Scene
from windcomfort.raster.ops import rasterize
from windcomfort.render import png_bytes, viridis_rgb
from windcomfort.training.checkpoint import Predictor, load_checkpoint

CONFIG_ENV = "WINDCOMFORT_CONFIG"


@dataclass
class ServiceConfig:
    checkpoints: dict[str, str]
    host: str = "127.0.0.1"
    port: int = 8710
    max_size: int = 512
    timeout_s: float = 60.0
    extent_m: float = 160.0  # used when rasterizing extent-less requests
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.checkpoints:
            raise ValueError("service needs at least one checkpoint")
        if self.max_size < 256:
            raise ValueError("max_size must be >= 256")

    @classmethod
    def load(cls, path: str | Path | None = None) -> "ServiceConfig":
        path = path or os.environ.get(CONFIG_ENV)
        if not path:
            raise ValueError(f"no config path given and ${CONFIG_ENV} unset")
        d = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(checkpoints=d["checkpoints"], host=d.get("host", "127.0.0.1"),
                   port=int(d.get("port", 8710)), max_size=int(d.get("max_size", 512)),
                   timeout_s=float(d.get("timeout_s", 60.0)),
                   extent_m=float(d.get("extent_m", 160.0)))


def encode_geometry_wgf(grid: FieldGrid) -> str:
    payload = WGF_MAGIC + struct.pack("<4I", grid.h, grid.w, grid.c, 0)
    payload += np.ascontiguousarray(grid.values, dtype="<f4").tobytes()
    return base64.b64encode(payload).decode("ascii")


def encode_flow_wgf(grid: FieldGrid) -> str:
    payload = WGF_MAGIC + struct.pack("<4I", grid.h, grid.w, 0, grid.c)
    payload += np.ascontiguousarray(grid.values, dtype="<f4").tobytes()
    return base64.b64encode(payload).decode("ascii")


def decode_geometry_wgf(b64: str, extent_m: float) -> FieldGrid:
    try:
        raw = base64.b64decode(b64, validate=True)
    except Exception as exc:
        raise InvalidScene(f"geometry blob is not base64: {exc}") from exc
    if len(raw) < 20 or raw[:4] != WGF_MAGIC:
        raise InvalidScene("geometry blob has a bad magic")
    h, w, cg, cf = struct.unpack_from("<4I", raw, 4)
    if cf != 0 or cg not in (1, 2):
        raise InvalidScene(f"expected 1 or 2 geometry channels and no flow, got {cg}+{cf}")
    if len(raw) != 20 + 4 * h * w * cg:
        raise InvalidScene("geometry blob is truncated")
    values = np.frombuffer(raw, dtype="<f4", offset=20).reshape(h, w, cg).copy()
    schema = ("mask",) if cg == 1 else ("mask", "height")
    try:
        return FieldGrid(values, schema, extent_m)
    except ValueError as exc:
        raise InvalidScene(f"geometry blob invalid: {exc}") from exc


class PredictRequest(BaseModel):
    model: str
    scene: dict | None = None
    geometry_wgf: str | None = None
    direction_sector: str = "W"
    size: int = 256


class ComfortRequest(BaseModel):
    model: str
    scene: dict | None = None
    geometry_wgf: str | None = None
    windrose: dict
    criteria: dict | None = None
    size: int = 256


class _ApiError(Exception):
    def __init__(self, status: int, detail: str):
        self.status = status
        self.detail = detail


def _load_registry(config: ServiceConfig) -> dict[str, Predictor]:
    registry = {}
    for name, path in config.checkpoints.items():
        registry[name] = Predictor(load_checkpoint(path))
    return registry


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="windcomfort")
    app.state.config = config
    app.state.registry = _load_registry(config)
    app.state.started = time.monotonic()

    def resolve_geometry(req) -> FieldGrid:
        if req.size > config.max_size:
            raise _ApiError(413, f"size {req.size} exceeds limit {config.max_size}")
        if req.geometry_wgf is not None:
            grid = decode_geometry_wgf(req.geometry_wgf, config.extent_m)
            if max(grid.h, grid.w) > config.max_size:
                raise _ApiError(413, f"raster {grid.h}x{grid.w} exceeds limit "
                                     f"{config.max_size}")
            return grid
        if req.scene is None:
            raise _ApiError(400, "request needs either scene or geometry_wgf")
        try:
            scene = Scene.from_json_dict(req.scene)
            predictor = app.state.registry[req.model]
            with_height = "height" in predictor.norm.get("channel_schema", [])
            return rasterize(scene, req.size, include_height=with_height)
        except InvalidScene as exc:
            raise _ApiError(400, str(exc)) from exc

    def resolve_model(name: str) -> Predictor:
        if name not in app.state.registry:
            raise _ApiError(404, f"unknown model {name!r}")
        return app.state.registry[name]

    @app.exception_handler(_ApiError)
    async def api_error_handler(_req: Request, exc: _ApiError):
        return JSONResponse(status_code=exc.status, content={"detail": exc.detail})

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "models": [
                {"name": name, "spec_hash": pred.ckpt.spec_hash(),
                 "kind": pred.ckpt.kind}
                for name, pred in sorted(app.state.registry.items())
            ],
            "uptime_s": time.monotonic() - app.state.started,
        }

    @app.post("/predict")
    def predict(req: PredictRequest):
        predictor = resolve_model(req.model)
        if req.direction_sector not in SECTOR_CCW_DEG:
            raise _ApiError(422, f"unsupported sector {req.direction_sector!r}")
        geometry = resolve_geometry(req)
        t0 = time.perf_counter()
        try:
            flow = predict_direction(predictor, geometry, req.direction_sector)
        except UnsupportedAngle as exc:
            raise _ApiError(422, str(exc)) from exc
        except WindcomfortError as exc:
            raise _ApiError(400, str(exc)) from exc
        elapsed_ms = (time.perf_counter() - t0) * 1000.0
        render = png_bytes(viridis_rgb(flow.channel("velocity"), 0.0,
                                       predictor.norm["v_max"]))
        return {
            "model": req.model,
            "spec_hash": predictor.ckpt.spec_hash(),
            "sector": req.direction_sector,
            "flow_wgf": encode_flow_wgf(flow),
            "render_png": base64.b64encode(render).decode("ascii"),
            "v_max": predictor.norm["v_max"],
            "inference_ms": elapsed_ms,
        }

    @app.post("/comfort")
    def comfort(req: ComfortRequest):
        predictor = resolve_model(req.model)
        geometry = resolve_geometry(req)
        try:
            rose = WindRose.from_json_dict(req.windrose)
            criteria = (ComfortCriteria.from_json_dict(req.criteria)
                        if req.criteria else ComfortCriteria())
        except (UnnormalizedRose, WindcomfortError) as exc:
            raise _ApiError(422, str(exc)) from exc
        t0 = time.perf_counter()
        try:
            cmap = comfort_map(predictor, geometry, rose, criteria)
        except WindcomfortError as exc:
            raise _ApiError(400, str(exc)) from exc
        elapsed_ms = (time.perf_counter() - t0) * 1000.0
        classes = FieldGrid(cmap.classes.astype(np.float32), ("class",),
                            geometry.extent_m)
        return {
            "model": req.model,
            "comfort_png": base64.b64encode(cmap.png_bytes()).decode("ascii"),
            "classes_wgf": encode_flow_wgf(classes),
            "histogram": cmap.histogram(),
            "provenance": cmap.provenance,
            "inference_ms": elapsed_ms,
        }

    return app


def run(config: ServiceConfig) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port)

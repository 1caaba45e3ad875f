import base64
import json
import struct

import numpy as np
import pytest
from fastapi.testclient import TestClient

from windcomfort.comfort import CLASS_NAMES
from windcomfort.server import (
    ServiceConfig,
    create_app,
    decode_geometry_wgf,
    encode_geometry_wgf,
)
from windcomfort.raster import FieldGrid


@pytest.fixture(scope="module")
def client(unet_checkpoint):
    _, path = unet_checkpoint
    config = ServiceConfig(checkpoints={"desk": str(path)}, max_size=256,
                           timeout_s=60.0)
    with TestClient(create_app(config)) as c:
        yield c


def scene_payload():
    return {"extent_m": 160.0, "buildings": [
        {"polygon": [[40.0, 50.0], [90.0, 50.0], [90.0, 80.0], [40.0, 80.0]],
         "height_m": 15.0}]}


def rose_payload():
    return {"sectors": ["N", "NE", "E", "SE", "S", "SW", "W", "NW"],
            "bin_edges_ms": [0.0, 3.0, 7.0],
            "freq": (np.full((8, 3), 1.0 / 24)).tolist()}


class TestHealth:
    def test_status_ok_with_models(self, client):
        body = client.get("/health").json()
        assert body["status"] == "ok"
        assert [m["name"] for m in body["models"]] == ["desk"]
        assert body["uptime_s"] >= 0.0

    def test_unknown_route_404(self, client):
        assert client.get("/nope").status_code == 404


class TestPredict:
    def test_scene_prediction_round(self, client):
        r = client.post("/predict", json={"model": "desk",
                                          "scene": scene_payload(),
                                          "direction_sector": "W",
                                          "size": 48})
        assert r.status_code == 200
        body = r.json()
        assert body["inference_ms"] >= 0.0
        raw = base64.b64decode(body["flow_wgf"])
        h, w, cg, cf = struct.unpack_from("<4I", raw, 4)
        assert (h, w, cg, cf) == (48, 48, 0, 1)

    def test_empty_scene_returns_near_uniform(self, client):
        r = client.post("/predict", json={
            "model": "desk", "scene": {"extent_m": 160.0, "buildings": []},
            "size": 48})
        assert r.status_code == 200
        raw = base64.b64decode(r.json()["flow_wgf"])
        values = np.frombuffer(raw, dtype="<f4", offset=20)
        assert np.isfinite(values).all()

    def test_deterministic_raster_payloads(self, client):
        req = {"model": "desk", "scene": scene_payload(), "size": 48}
        b1 = client.post("/predict", json=req).json()
        b2 = client.post("/predict", json=req).json()
        assert b1["flow_wgf"] == b2["flow_wgf"]
        assert b1["render_png"] == b2["render_png"]

    def test_geometry_blob_input(self, client):
        grid = FieldGrid(np.zeros((48, 48), np.float32), ("mask",), 160.0)
        r = client.post("/predict", json={"model": "desk",
                                          "geometry_wgf": encode_geometry_wgf(grid)})
        assert r.status_code == 200

    def test_unknown_model_404(self, client):
        r = client.post("/predict", json={"model": "ghost",
                                          "scene": scene_payload()})
        assert r.status_code == 404

    def test_bad_scene_400(self, client):
        bad = {"extent_m": 160.0, "buildings": [
            {"polygon": [[0, 0], [10, 10], [10, 0], [0, 10]], "height_m": 5.0}]}
        r = client.post("/predict", json={"model": "desk", "scene": bad,
                                          "size": 48})
        assert r.status_code == 400

    def test_oversize_413(self, client):
        r = client.post("/predict", json={"model": "desk",
                                          "scene": scene_payload(),
                                          "size": 1024})
        assert r.status_code == 413

    def test_bad_sector_422(self, client):
        r = client.post("/predict", json={"model": "desk",
                                          "scene": scene_payload(),
                                          "direction_sector": "UP",
                                          "size": 48})
        assert r.status_code == 422


class TestComfort:
    def test_full_pipeline(self, client):
        r = client.post("/comfort", json={"model": "desk",
                                          "scene": scene_payload(),
                                          "windrose": rose_payload(),
                                          "size": 48})
        assert r.status_code == 200
        body = r.json()
        assert set(CLASS_NAMES) <= set(body["histogram"])
        assert body["provenance"]["criteria"]["p_exc"] == 0.05

    def test_zero_wind_rose_all_sitting(self, client):
        rose = rose_payload()
        freq = np.zeros((8, 3))
        freq[:, 0] = 1.0 / 8
        rose["bin_edges_ms"] = [0.0, 3.0, 7.0]
        rose["freq"] = freq.tolist()
        r = client.post("/comfort", json={"model": "desk",
                                          "scene": scene_payload(),
                                          "windrose": rose, "size": 48})
        hist = r.json()["histogram"]
        assert hist["standing"] == hist["strolling"] == 0
        assert hist["uncomfortable"] == 0
        assert hist["sitting"] > 0

    def test_default_criteria_echoed(self, client):
        r = client.post("/comfort", json={"model": "desk",
                                          "scene": scene_payload(),
                                          "windrose": rose_payload(),
                                          "size": 48})
        crit = r.json()["provenance"]["criteria"]
        assert crit["thresholds_ms"] == [2.5, 4.0, 6.0, 8.0]

    def test_unnormalized_rose_422(self, client):
        rose = rose_payload()
        rose["freq"] = (np.full((8, 3), 1.0)).tolist()
        r = client.post("/comfort", json={"model": "desk",
                                          "scene": scene_payload(),
                                          "windrose": rose, "size": 48})
        assert r.status_code == 422

    def test_identical_requests_identical_payloads(self, client):
        req = {"model": "desk", "scene": scene_payload(),
               "windrose": rose_payload(), "size": 48}
        b1 = client.post("/comfort", json=req).json()
        b2 = client.post("/comfort", json=req).json()
        b1.pop("inference_ms")
        b2.pop("inference_ms")
        assert b1 == b2


class TestGeometryCodec:
    def test_round_trip(self):
        rng = np.random.default_rng(0)
        grid = FieldGrid((rng.random((16, 16)) < 0.3).astype(np.float32),
                         ("mask",), 160.0)
        again = decode_geometry_wgf(encode_geometry_wgf(grid), 160.0)
        assert np.array_equal(again.values, grid.values)

    def test_garbage_rejected(self):
        from windcomfort.errors import InvalidScene

        with pytest.raises(InvalidScene):
            decode_geometry_wgf("not base64!!", 160.0)

    def test_config_requires_checkpoints(self):
        with pytest.raises(ValueError):
            ServiceConfig(checkpoints={})

    def test_config_env_load(self, unet_checkpoint, tmp_path, monkeypatch):
        _, path = unet_checkpoint
        cfg_path = tmp_path / "svc.json"
        cfg_path.write_text(json.dumps({"checkpoints": {"m": str(path)},
                                        "max_size": 300}))
        monkeypatch.setenv("WINDCOMFORT_CONFIG", str(cfg_path))
        config = ServiceConfig.load()
        assert config.max_size == 300
        assert "m" in config.checkpoints

"""Scene synthesis and dataset generation for the five geometry families."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from windcomfort.oracle.solver import SolverConfig, solve
from windcomfort.raster.dataset import FAMILIES, DatasetManifest, SamplePair
from windcomfort.raster.grid import Building, FieldGrid, Scene
from windcomfort.raster.ops import _points_in_polygon, bucketize, rasterize

log = logging.getLogger(__name__)

EDGE_MARGIN = 0.1  # fraction of extent kept clear on every side

DEFAULT_RANGES = {
    # fractions of the scene extent unless noted
    "wall": {"length": (0.35, 0.65), "width": (0.02, 0.05),
             "offset": (-0.12, 0.12), "angle_deg": (-45.0, 45.0),
             "height_m": (10.0, 10.0), "n_buildings": (1, 1)},
    "single": {"length": (0.10, 0.30), "width": (0.08, 0.25),
               "offset": (-0.18, 0.18), "angle_deg": (0.0, 90.0),
               "height_m": (10.0, 10.0), "n_buildings": (1, 1)},
    "two": {"length": (0.08, 0.22), "width": (0.06, 0.18),
            "offset": (-0.22, 0.22), "angle_deg": (0.0, 90.0),
            "height_m": (10.0, 10.0), "n_buildings": (2, 2)},
    "two_height": {"length": (0.08, 0.22), "width": (0.06, 0.18),
                   "offset": (-0.22, 0.22), "angle_deg": (0.0, 90.0),
                   "height_m": (10.0, 60.0), "n_buildings": (2, 2)},
    "urban": {"length": (0.04, 0.12), "width": (0.03, 0.10),
              "offset": (-0.32, 0.32), "angle_deg": (0.0, 90.0),
              "height_m": (10.0, 130.0), "n_buildings": (6, 12)},
}

DEFAULT_EXTENT_M = {"wall": 160.0, "single": 160.0, "two": 160.0,
                    "two_height": 160.0, "urban": 600.0}

URBAN_V_MAX = 15.0


@dataclass
class FamilySpec:
    family: str
    count: int = 64
    seed: int = 0
    extent_m: float = 0.0
    ranges: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.count < 1:
            raise ValueError("count must be positive")
        if self.extent_m <= 0:
            self.extent_m = DEFAULT_EXTENT_M[self.family]
        merged = dict(DEFAULT_RANGES[self.family])
        merged.update(self.ranges)
        self.ranges = merged

    @property
    def with_height(self) -> bool:
        return self.family in ("two_height", "urban")


def _rect_polygon(cx, cy, length, width, angle_deg):
    a = math.radians(angle_deg)
    ca, sa = math.cos(a), math.sin(a)
    hx, hy = length / 2.0, width / 2.0
    corners = []
    for dx, dy in ((-hx, -hy), (hx, -hy), (hx, hy), (-hx, hy)):
        corners.append((cx + dx * ca - dy * sa, cy + dx * sa + dy * ca))
    return tuple(corners)


def _polygons_overlap(p1, p2) -> bool:
    xs1 = np.array([v[0] for v in p1])
    ys1 = np.array([v[1] for v in p1])
    xs2 = np.array([v[0] for v in p2])
    ys2 = np.array([v[1] for v in p2])
    if _points_in_polygon(xs1, ys1, p2).any() or _points_in_polygon(xs2, ys2, p1).any():
        return True
    c1 = (float(xs1.mean()), float(ys1.mean()))
    c2 = (float(xs2.mean()), float(ys2.mean()))
    return _points_in_polygon(np.array([c1[0]]), np.array([c1[1]]), p2)[0] \
        or _points_in_polygon(np.array([c2[0]]), np.array([c2[1]]), p1)[0]


def sample_scene(spec: FamilySpec, rng: np.random.Generator) -> Scene:
    """Draw one valid scene; resamples (and logs) candidates that fail."""
    r = spec.ranges
    ext = spec.extent_m
    lo, hi = EDGE_MARGIN * ext, (1.0 - EDGE_MARGIN) * ext
    n_lo, n_hi = r["n_buildings"]
    n = int(rng.integers(n_lo, n_hi + 1))
    shared_angle = float(rng.uniform(*r["angle_deg"]))
    buildings: list[Building] = []
    attempts = 0
    while len(buildings) < n:
        attempts += 1
        if attempts > 200 * n:
            raise RuntimeError(f"cannot place {n} buildings for {spec.family}")
        length = float(rng.uniform(*r["length"])) * ext
        width = float(rng.uniform(*r["width"])) * ext
        cx = ext / 2.0 + float(rng.uniform(*r["offset"])) * ext
        cy = ext / 2.0 + float(rng.uniform(*r["offset"])) * ext
        angle = shared_angle if spec.family in ("two", "two_height") \
            else float(rng.uniform(*r["angle_deg"]))
        poly = _rect_polygon(cx, cy, length, width, angle)
        if not all(lo <= x <= hi and lo <= y <= hi for x, y in poly):
            log.debug("skip candidate outside margin (%s)", spec.family)
            continue
        if any(_polygons_overlap(poly, b.polygon) for b in buildings):
            log.debug("skip overlapping candidate (%s)", spec.family)
            continue
        h_lo, h_hi = r["height_m"]
        height = h_lo if h_lo == h_hi else float(rng.uniform(h_lo, h_hi))
        buildings.append(Building(polygon=poly, height_m=height))
    scene = Scene(buildings=tuple(buildings), extent_m=ext)
    scene.validate()
    return scene


def _crop_center_disk(grid: FieldGrid, out_size: int) -> FieldGrid:
    """Central out_size crop, zeroed outside the inscribed circle."""
    h = grid.h
    o = (h - out_size) // 2
    values = grid.values[o:o + out_size, o:o + out_size].copy()
    c = (out_size - 1) / 2.0
    rr, cc = np.meshgrid(np.arange(out_size), np.arange(out_size), indexing="ij")
    outside = (rr - c) ** 2 + (cc - c) ** 2 > (out_size / 2.0) ** 2
    values[outside] = 0.0
    return FieldGrid(values, grid.channels, grid.extent_m / 2.0, dict(grid.meta))


def generate(spec: FamilySpec, cfg: SolverConfig,
             n_bins: int = 20, name: str | None = None,
             split_seed: int = 0, train_fraction: float = 0.8,
             ) -> tuple[DatasetManifest, list[SamplePair]]:
    """Synthesize scenes, solve each one, bucketize, and pack sample pairs.

    Fully deterministic given (spec, cfg): per-sample RNG substreams are
    spawned by index, so parallel generation would merge identically.
    """
    substreams = np.random.SeedSequence(spec.seed).spawn(spec.count)
    solve_size = cfg.grid * 2 if spec.family == "urban" else cfg.grid
    geometries: list[FieldGrid] = []
    raw_flows: list[FieldGrid] = []
    unconverged = 0
    for idx in range(spec.count):
        rng = np.random.default_rng(substreams[idx])
        scene = sample_scene(spec, rng)
        geo = rasterize(scene, solve_size, include_height=spec.with_height)
        flow = solve(geo, cfg)
        if not flow.meta.get("converged", False):
            unconverged += 1
        if spec.family == "urban":
            geo = _crop_center_disk(geo, cfg.grid)
            flow = _crop_center_disk(flow, cfg.grid)
        geometries.append(geo)
        raw_flows.append(flow)
    if unconverged:
        log.warning("%d/%d solves hit max_steps before tolerance",
                    unconverged, spec.count)

    if spec.family == "urban":
        v_max = URBAN_V_MAX
        peak = max(float(fl.values.max()) for fl in raw_flows)
        if peak > v_max:
            log.warning("clamping flows: observed max %.2f m/s > v_max %.1f",
                        peak, v_max)
            for fl in raw_flows:
                np.minimum(fl.values, v_max, out=fl.values)
    else:
        peak = max(float(fl.values.max()) for fl in raw_flows)
        v_max = max(math.ceil(peak / 0.5) * 0.5, 0.5)

    samples = [
        SamplePair(geometry=geo, flow=bucketize(fl, v_max, n_bins))
        for geo, fl in zip(geometries, raw_flows)
    ]
    h_max = None
    if spec.with_height:
        h_max = max(float(s.geometry.channel("height").max()) for s in samples)
    manifest = DatasetManifest(
        name=name or f"{spec.family}-{spec.count}x{cfg.grid}-seed{spec.seed}",
        family=spec.family,
        sample_count=len(samples),
        channel_schema=samples[0].geometry.channels,
        v_max=v_max,
        n_bins=n_bins,
        split_seed=split_seed,
        train_fraction=train_fraction,
        extent_m=samples[0].geometry.extent_m,
        v_ref=cfg.v_ref,
        h_max=h_max,
    )
    return manifest, samples

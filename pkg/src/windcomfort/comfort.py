"""Pedestrian wind comfort: roses, directional prediction, classification.

Sector convention: compass names N..NW, wind blowing FROM that direction.
Models are trained with the inlet on the left edge (wind from the west), so a
prediction for sector s pre-rotates the conditioning input counterclockwise by
``SECTOR_CCW_DEG[s]`` and rotates the result back.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from windcomfort.errors import (
    CriteriaShapeMismatch,
    UnnormalizedRose,
    UnsupportedAngle,
)
from windcomfort.raster.grid import FieldGrid
from windcomfort.raster.ops import rotate_values
from windcomfort.render import indexed_png_bytes
from windcomfort.training.checkpoint import Checkpoint, Predictor
from windcomfort.training.data import pack_geometry, unpack_flow

SECTORS = ("N", "NE", "E", "SE", "S", "SW", "W", "NW")

# CCW degrees that bring each sector's wind to the training direction (west).
SECTOR_CCW_DEG = {"W": 0, "NW": 45, "N": 90, "NE": 135,
                  "E": 180, "SE": 225, "S": 270, "SW": 315}

CLASS_NAMES = ("sitting", "standing", "strolling", "business_walking",
               "uncomfortable")
CLASS_COLORS = [(26, 150, 65), (166, 217, 106), (255, 255, 191),
                (253, 174, 97), (215, 25, 28)]
BUILDING_VALUE = 254
BUILDING_COLOR = (70, 70, 70)
OUTSIDE_VALUE = 255
OUTSIDE_COLOR = (255, 255, 255)

ROSE_TOL = 1e-6


@dataclass
class WindRose:
    """8 sectors x speed bins; ``bin_edges_ms`` are upper edges at 10 m."""

    bin_edges_ms: tuple[float, ...]
    freq: np.ndarray  # (8, n_bins)

    def __post_init__(self):
        self.bin_edges_ms = tuple(float(e) for e in self.bin_edges_ms)
        self.freq = np.asarray(self.freq, dtype=np.float64)
        if self.freq.shape != (8, len(self.bin_edges_ms)):
            raise UnnormalizedRose(
                f"freq shape {self.freq.shape} does not match 8 sectors x "
                f"{len(self.bin_edges_ms)} bins")
        if np.any(self.freq < 0):
            raise UnnormalizedRose("negative frequency")
        total = float(self.freq.sum())
        if abs(total - 1.0) > ROSE_TOL:
            raise UnnormalizedRose(f"frequencies sum to {total}, expected 1")
        edges = np.array(self.bin_edges_ms)
        if len(edges) == 0 or np.any(np.diff(edges) <= 0):
            raise UnnormalizedRose("bin edges must be strictly increasing")

    @property
    def bin_mid_speeds(self) -> np.ndarray:
        edges = np.array(self.bin_edges_ms)
        lowers = np.concatenate([[0.0], edges[:-1]])
        return (lowers + edges) / 2.0

    def rotated(self, sector_shift: int) -> "WindRose":
        """Shift sector rows; -2 matches a 90-degree CCW geometry rotation."""
        return WindRose(self.bin_edges_ms, np.roll(self.freq, sector_shift, axis=0))

    def to_json_dict(self) -> dict:
        return {"sectors": list(SECTORS),
                "bin_edges_ms": list(self.bin_edges_ms),
                "freq": self.freq.tolist()}

    @classmethod
    def from_json_dict(cls, d: dict) -> "WindRose":
        try:
            sectors = tuple(d["sectors"])
            edges = d["bin_edges_ms"]
            freq = d["freq"]
        except (KeyError, TypeError) as exc:
            raise UnnormalizedRose(f"malformed wind rose JSON: {exc}") from exc
        if sectors != SECTORS:
            raise UnnormalizedRose(f"sectors must be {SECTORS}, got {sectors}")
        return cls(tuple(edges), np.array(freq, dtype=np.float64))

    @classmethod
    def load(cls, path: str | Path) -> "WindRose":
        return cls.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass
class ComfortCriteria:
    """Lawson-style ladder: boundary speed per class plus one exceedance cap.

    Defaults follow the LDDC ladder (2.5/4/6/8 m/s at 5%); they are
    configuration, not published constants of this artifact's method.
    """

    thresholds_ms: tuple[float, ...] = (2.5, 4.0, 6.0, 8.0)
    p_exc: float = 0.05

    def __post_init__(self):
        self.thresholds_ms = tuple(float(t) for t in self.thresholds_ms)
        if len(self.thresholds_ms) != len(CLASS_NAMES) - 1:
            raise CriteriaShapeMismatch(
                f"need {len(CLASS_NAMES) - 1} thresholds, got {len(self.thresholds_ms)}")
        if np.any(np.diff(self.thresholds_ms) <= 0):
            raise CriteriaShapeMismatch("thresholds must be strictly increasing")
        if not 0.0 < self.p_exc < 1.0:
            raise CriteriaShapeMismatch("p_exc must lie in (0, 1)")

    def to_json_dict(self) -> dict:
        return {"classes": list(CLASS_NAMES),
                "thresholds_ms": list(self.thresholds_ms), "p_exc": self.p_exc}

    @classmethod
    def from_json_dict(cls, d: dict) -> "ComfortCriteria":
        return cls(tuple(d.get("thresholds_ms", (2.5, 4.0, 6.0, 8.0))),
                   float(d.get("p_exc", 0.05)))


@dataclass
class ComfortMap:
    classes: np.ndarray  # uint8, BUILDING_VALUE / OUTSIDE_VALUE for no-data
    extent_m: float
    provenance: dict = field(default_factory=dict)

    @property
    def legend(self) -> dict:
        return {name: color for name, color in zip(CLASS_NAMES, CLASS_COLORS)}

    def histogram(self) -> dict[str, int]:
        counts = {name: int((self.classes == k).sum())
                  for k, name in enumerate(CLASS_NAMES)}
        counts["building"] = int((self.classes == BUILDING_VALUE).sum())
        counts["outside"] = int((self.classes == OUTSIDE_VALUE).sum())
        return counts

    def png_bytes(self) -> bytes:
        return indexed_png_bytes(self.classes, CLASS_COLORS, {
            BUILDING_VALUE: BUILDING_COLOR, OUTSIDE_VALUE: OUTSIDE_COLOR})

    def write(self, png_path: str | Path) -> None:
        png_path = Path(png_path)
        png_path.write_bytes(self.png_bytes())
        sidecar = {"histogram": self.histogram(), "legend":
                   {n: list(c) for n, c in self.legend.items()},
                   "provenance": self.provenance}
        png_path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2),
                                                 encoding="utf-8")


def predict_direction(ckpt: Checkpoint | Predictor, geometry: FieldGrid,
                      sector: str) -> FieldGrid:
    """Flow prediction for wind from `sector` via conditioning-input rotation.

    The packed model input (not the raw mask) is rotated so binary channels
    may take interpolated values at 45-degree sectors, mirroring how the
    training-time conditioning images behave under resampling.
    """
    if sector not in SECTOR_CCW_DEG:
        raise UnsupportedAngle(f"sector {sector!r} not in {sorted(SECTOR_CCW_DEG)}")
    if geometry.h != geometry.w:
        raise UnsupportedAngle("directional prediction needs a square raster")
    predictor = ckpt if isinstance(ckpt, Predictor) else Predictor(ckpt)
    delta = SECTOR_CCW_DEG[sector]
    packed = pack_geometry(geometry, predictor.norm.get("h_max"),
                           predictor.ckpt.gen_spec.sdf_channel)
    rotated = rotate_values(np.moveaxis(packed, 0, 2), delta, "bilinear")
    x = torch.from_numpy(np.moveaxis(rotated, 2, 0).copy()).unsqueeze(0)
    with torch.no_grad():
        y = predictor.gen(x)
    flow = unpack_flow(y[0], predictor.norm["v_max"], geometry.extent_m)
    back = rotate_values(flow.values, (360 - delta) % 360, "bilinear")
    return FieldGrid(back, ("velocity",), geometry.extent_m,
                     {"sector": sector})


def exceedance(speeds_per_sector: dict[str, FieldGrid], rose: WindRose,
               threshold_ms: float, u_ref: float) -> FieldGrid:
    """Per-pixel probability that wind speed exceeds a threshold.

    Predictions made at inlet speed ``u_ref`` scale linearly to each rose
    bin's midpoint speed (flow-speed-independent amplification factors).
    """
    if abs(float(rose.freq.sum()) - 1.0) > ROSE_TOL:
        raise UnnormalizedRose("rose lost normalization")
    if u_ref <= 0:
        raise ValueError("u_ref must be positive")
    mids = rose.bin_mid_speeds
    first = speeds_per_sector[SECTORS[0]]
    prob = np.zeros((first.h, first.w), dtype=np.float64)
    for si, sector in enumerate(SECTORS):
        pred = speeds_per_sector[sector].channel("velocity").astype(np.float64)
        for bi, mid in enumerate(mids):
            w = rose.freq[si, bi]
            if w == 0.0:
                continue
            prob += w * (pred * (mid / u_ref) > threshold_ms)
    return FieldGrid(prob.astype(np.float32), ("velocity",), first.extent_m,
                     {"threshold_ms": threshold_ms})


def classify(exceedance_stack: np.ndarray, criteria: ComfortCriteria,
             building_mask: np.ndarray | None = None,
             outside_mask: np.ndarray | None = None) -> np.ndarray:
    """Assign the most demanding class whose boundary holds (<= p_exc)."""
    n_thr = len(criteria.thresholds_ms)
    if exceedance_stack.shape[0] != n_thr:
        raise CriteriaShapeMismatch(
            f"{exceedance_stack.shape[0]} exceedance maps, {n_thr} thresholds")
    h, w = exceedance_stack.shape[1:]
    classes = np.full((h, w), len(CLASS_NAMES) - 1, dtype=np.uint8)
    for k in range(n_thr - 1, -1, -1):
        classes[exceedance_stack[k] <= criteria.p_exc] = k
    if building_mask is not None:
        classes[building_mask > 0.5] = BUILDING_VALUE
    if outside_mask is not None:
        classes[outside_mask] = OUTSIDE_VALUE
    return classes


def _needs_circle_mask(rose: WindRose) -> bool:
    diagonal = [SECTORS.index(s) for s in ("NE", "SE", "SW", "NW")]
    moving = rose.bin_mid_speeds > 0
    return bool(rose.freq[np.ix_(diagonal, np.where(moving)[0])].sum() > 0)


def outside_circle(h: int, w: int) -> np.ndarray:
    c_r, c_c = (h - 1) / 2.0, (w - 1) / 2.0
    rr, cc = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    return (rr - c_r) ** 2 + (cc - c_c) ** 2 > (min(h, w) / 2.0) ** 2


def comfort_map(ckpt: Checkpoint | Predictor, geometry: FieldGrid,
                rose: WindRose, criteria: ComfortCriteria | None = None) -> ComfortMap:
    """Eight directional predictions, exceedance per class boundary, classify."""
    predictor = ckpt if isinstance(ckpt, Predictor) else Predictor(ckpt)
    criteria = criteria or ComfortCriteria()
    speeds = {s: predict_direction(predictor, geometry, s) for s in SECTORS}
    u_ref = float(predictor.norm.get("v_ref") or 1.0)
    stack = np.stack([
        exceedance(speeds, rose, t, u_ref).channel("velocity")
        for t in criteria.thresholds_ms
    ])
    outside = outside_circle(geometry.h, geometry.w) if _needs_circle_mask(rose) else None
    classes = classify(stack, criteria, geometry.channel("mask"), outside)
    return ComfortMap(
        classes=classes,
        extent_m=geometry.extent_m,
        provenance={
            "spec_hash": predictor.ckpt.spec_hash(),
            "u_ref": u_ref,
            "criteria": criteria.to_json_dict(),
            "rose_edges_ms": list(rose.bin_edges_ms),
        },
    )

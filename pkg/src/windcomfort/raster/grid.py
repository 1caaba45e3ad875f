"""Core raster carriers: vector scenes and channelled field grids."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from windcomfort.errors import InvalidScene

CHANNEL_TAGS = ("mask", "height", "sdf", "coord_i", "coord_j", "velocity", "class")


def _segments_properly_intersect(p1, p2, q1, q2) -> bool:
    """True when segment p1-p2 crosses q1-q2 at an interior point."""

    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return (v > 0) - (v < 0)

    o1 = orient(p1, p2, q1)
    o2 = orient(p1, p2, q2)
    o3 = orient(q1, q2, p1)
    o4 = orient(q1, q2, p2)
    return o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4)


def polygon_is_simple(poly) -> bool:
    """No two non-adjacent edges intersect; adjacent edges only share the vertex."""
    n = len(poly)
    for i in range(n):
        a1, a2 = poly[i], poly[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            b1, b2 = poly[j], poly[(j + 1) % n]
            if _segments_properly_intersect(a1, a2, b1, b2):
                return False
    return True


@dataclass(frozen=True)
class Building:
    polygon: tuple[tuple[float, float], ...]
    height_m: float


@dataclass(frozen=True)
class Scene:
    """Vector building footprints in meters. Wind inlet is the left edge."""

    buildings: tuple[Building, ...]
    extent_m: float

    def validate(self) -> None:
        if self.extent_m <= 0:
            raise InvalidScene(f"extent must be positive, got {self.extent_m}")
        for k, b in enumerate(self.buildings):
            if len(b.polygon) < 3:
                raise InvalidScene(f"building {k}: polygon needs >= 3 vertices")
            if b.height_m <= 0:
                raise InvalidScene(f"building {k}: height must be positive")
            for x, y in b.polygon:
                if not (0.0 <= x <= self.extent_m and 0.0 <= y <= self.extent_m):
                    raise InvalidScene(
                        f"building {k}: vertex ({x}, {y}) outside [0, {self.extent_m}]^2"
                    )
            if not polygon_is_simple(b.polygon):
                raise InvalidScene(f"building {k}: polygon self-intersects")

    def to_json_dict(self) -> dict:
        return {
            "extent_m": self.extent_m,
            "buildings": [
                {"polygon": [[float(x), float(y)] for x, y in b.polygon],
                 "height_m": float(b.height_m)}
                for b in self.buildings
            ],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Scene":
        try:
            buildings = tuple(
                Building(
                    polygon=tuple((float(x), float(y)) for x, y in b["polygon"]),
                    height_m=float(b["height_m"]),
                )
                for b in d.get("buildings", [])
            )
            scene = cls(buildings=buildings, extent_m=float(d["extent_m"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidScene(f"malformed scene JSON: {exc}") from exc
        scene.validate()
        return scene


@dataclass
class FieldGrid:
    """H x W x C float32 raster with a named channel schema.

    The universal carrier for geometry masks, SDFs, coordinate channels,
    solved/predicted flow, and residual maps.
    """

    values: np.ndarray
    channels: tuple[str, ...]
    extent_m: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float32)
        if v.ndim == 2:
            v = v[:, :, None]
        if v.ndim != 3:
            raise ValueError(f"FieldGrid values must be HxWxC, got shape {v.shape}")
        self.values = v
        self.channels = tuple(self.channels)
        if len(self.channels) != v.shape[2]:
            raise ValueError(
                f"schema {self.channels} does not match {v.shape[2]} channels"
            )
        for tag in self.channels:
            if tag not in CHANNEL_TAGS:
                raise ValueError(f"unknown channel tag {tag!r}")
        if not np.all(np.isfinite(v)):
            raise ValueError("FieldGrid values must be finite")
        if "mask" in self.channels:
            m = self.channel("mask")
            if not np.all((m == 0.0) | (m == 1.0)):
                raise ValueError("mask channel must be binary")
            if "height" in self.channels:
                h = self.channel("height")
                if np.any(h < 0) or np.any(h[m == 0.0] != 0.0):
                    raise ValueError("height must be >= 0 and 0 off-mask")

    @property
    def h(self) -> int:
        return self.values.shape[0]

    @property
    def w(self) -> int:
        return self.values.shape[1]

    @property
    def c(self) -> int:
        return self.values.shape[2]

    def channel(self, tag: str) -> np.ndarray:
        return self.values[:, :, self.channels.index(tag)]

    def copy(self) -> "FieldGrid":
        return FieldGrid(self.values.copy(), self.channels, self.extent_m,
                         dict(self.meta))


def concat_channels(*grids: FieldGrid) -> FieldGrid:
    """Stack grids channel-wise; they must agree on H, W and extent."""
    first = grids[0]
    for g in grids[1:]:
        if (g.h, g.w) != (first.h, first.w) or g.extent_m != first.extent_m:
            raise ValueError("grids disagree on shape or extent")
    meta: dict = {}
    for g in grids:
        meta.update(g.meta)
    return FieldGrid(
        np.concatenate([g.values for g in grids], axis=2),
        tuple(t for g in grids for t in g.channels),
        first.extent_m,
        meta,
    )

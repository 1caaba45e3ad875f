"""On-disk dataset container: manifest.json plus one .wgf file per sample."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from windcomfort.errors import CorruptContainer
from windcomfort.raster.grid import FieldGrid

WGF_MAGIC = b"WGF1"

FAMILIES = ("wall", "single", "two", "two_height", "urban")


@dataclass
class SamplePair:
    """Paired geometry raster and bucketized velocity-magnitude raster."""

    geometry: FieldGrid
    flow: FieldGrid

    def __post_init__(self):
        g, f = self.geometry, self.flow
        if (g.h, g.w) != (f.h, f.w) or g.extent_m != f.extent_m:
            raise ValueError("geometry and flow must share H, W and extent")
        if f.c != 1:
            raise ValueError("flow must be a single velocity channel")


@dataclass
class DatasetManifest:
    name: str
    family: str
    sample_count: int
    channel_schema: tuple[str, ...]
    v_max: float
    n_bins: int = 20
    split_seed: int = 0
    train_fraction: float = 0.8
    extent_m: float = 0.0
    v_ref: float = 0.0
    h_max: float | None = None
    samples: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.channel_schema = tuple(self.channel_schema)
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.n_bins < 2:
            raise ValueError("n_bins must be >= 2")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")

    def split(self) -> tuple[list[int], list[int]]:
        """Deterministic train/test index split from (split_seed, sample ids)."""
        rng = np.random.default_rng(self.split_seed)
        perm = rng.permutation(self.sample_count)
        n_train = int(self.sample_count * self.train_fraction)
        return sorted(perm[:n_train].tolist()), sorted(perm[n_train:].tolist())

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "family": self.family,
            "sample_count": self.sample_count,
            "channel_schema": list(self.channel_schema),
            "v_max": self.v_max,
            "n_bins": self.n_bins,
            "split_seed": self.split_seed,
            "train_fraction": self.train_fraction,
            "extent_m": self.extent_m,
            "v_ref": self.v_ref,
            "h_max": self.h_max,
            "samples": list(self.samples),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "DatasetManifest":
        try:
            return cls(
                name=d["name"],
                family=d["family"],
                sample_count=int(d["sample_count"]),
                channel_schema=tuple(d["channel_schema"]),
                v_max=float(d["v_max"]),
                n_bins=int(d["n_bins"]),
                split_seed=int(d["split_seed"]),
                train_fraction=float(d["train_fraction"]),
                extent_m=float(d.get("extent_m", 0.0)),
                v_ref=float(d.get("v_ref", 0.0)),
                h_max=None if d.get("h_max") is None else float(d["h_max"]),
                samples=list(d.get("samples", [])),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptContainer(f"bad manifest: {exc}") from exc


def write_sample(path: Path, pair: SamplePair) -> None:
    g = np.ascontiguousarray(pair.geometry.values, dtype="<f4")
    f = np.ascontiguousarray(pair.flow.values, dtype="<f4")
    h, w = g.shape[:2]
    with open(path, "wb") as fh:
        fh.write(WGF_MAGIC)
        fh.write(struct.pack("<4I", h, w, g.shape[2], f.shape[2]))
        fh.write(g.tobytes())
        fh.write(f.tobytes())


def read_sample(path: Path, channel_schema: tuple[str, ...], extent_m: float) -> SamplePair:
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise CorruptContainer(f"cannot read {path}: {exc}") from exc
    if len(raw) < 20 or raw[:4] != WGF_MAGIC:
        raise CorruptContainer(f"{path.name}: bad magic")
    h, w, cg, cf = struct.unpack_from("<4I", raw, 4)
    expected = 20 + 4 * h * w * (cg + cf)
    if len(raw) != expected:
        raise CorruptContainer(
            f"{path.name}: size {len(raw)} != expected {expected} for dims "
            f"{h}x{w}x({cg}+{cf})"
        )
    if cg != len(channel_schema):
        raise CorruptContainer(
            f"{path.name}: {cg} geometry channels, manifest says {len(channel_schema)}"
        )
    data = np.frombuffer(raw, dtype="<f4", offset=20)
    geo = data[: h * w * cg].reshape(h, w, cg)
    flow = data[h * w * cg:].reshape(h, w, cf)
    return SamplePair(
        geometry=FieldGrid(geo.copy(), channel_schema, extent_m),
        flow=FieldGrid(flow.copy(), ("velocity",), extent_m),
    )


def write_dataset(manifest: DatasetManifest, samples: list[SamplePair],
                  out_dir: str | Path, previews: bool = False) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = []
    for i, pair in enumerate(samples):
        name = f"{i:06d}.wgf"
        write_sample(out / name, pair)
        names.append(name)
        if previews:
            from windcomfort.render import save_png  # lazy: pulls matplotlib
            save_png(out / f"{i:06d}.png", pair.flow.channel("velocity"),
                     vmax=manifest.v_max)
    manifest.samples = names
    manifest.sample_count = len(names)
    (out / "manifest.json").write_text(
        json.dumps(manifest.to_json_dict(), indent=2), encoding="utf-8")
    return out


def read_dataset(in_dir: str | Path) -> tuple[DatasetManifest, list[SamplePair]]:
    root = Path(in_dir)
    mpath = root / "manifest.json"
    if not mpath.is_file():
        raise CorruptContainer(f"no manifest.json in {root}")
    try:
        manifest = DatasetManifest.from_json_dict(
            json.loads(mpath.read_text(encoding="utf-8")))
    except json.JSONDecodeError as exc:
        raise CorruptContainer(f"manifest.json does not parse: {exc}") from exc
    samples = [
        read_sample(root / name, manifest.channel_schema, manifest.extent_m)
        for name in manifest.samples
    ]
    if len(samples) != manifest.sample_count:
        raise CorruptContainer(
            f"manifest promises {manifest.sample_count} samples, found {len(samples)}")
    return manifest, samples

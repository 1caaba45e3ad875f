"""Evaluation metrics, residual maps, and the cross-dataset harness."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from windcomfort.errors import AllPixelsExcluded, ShapeMismatch
from windcomfort.raster.dataset import DatasetManifest, SamplePair
from windcomfort.raster.grid import FieldGrid
from windcomfort.training.checkpoint import Checkpoint, Predictor

# Pixels whose target speed falls below eps are excluded from the relative
# error; bucketization makes exact zeros common, so a guard is mandatory.
MRE_EPS_FRACTION = 0.05


def _flat_pair(y, y_hat):
    a = np.asarray(y, dtype=np.float64).ravel()
    b = np.asarray(y_hat, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ShapeMismatch(f"{a.shape} vs {b.shape}")
    return a, b


def mae(y, y_hat) -> float:
    a, b = _flat_pair(y, y_hat)
    return float(np.abs(a - b).mean())


def rmse(y, y_hat) -> float:
    a, b = _flat_pair(y, y_hat)
    return float(np.sqrt(((a - b) ** 2).mean()))


def mre(y, y_hat, eps: float) -> float:
    """Mean |y - y_hat| / y over pixels with y >= eps."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    a, b = _flat_pair(y, y_hat)
    keep = a >= eps
    if not keep.any():
        raise AllPixelsExcluded(f"no target pixel reaches eps={eps}")
    return float((np.abs(a - b)[keep] / a[keep]).mean())


def mre_excluded_count(y, eps: float) -> int:
    a = np.asarray(y, dtype=np.float64).ravel()
    return int((a < eps).sum())


def residual_map(y: FieldGrid, y_hat: FieldGrid) -> FieldGrid:
    if (y.h, y.w) != (y_hat.h, y_hat.w):
        raise ShapeMismatch(f"{(y.h, y.w)} vs {(y_hat.h, y_hat.w)}")
    resid = np.abs(y.values.astype(np.float64) - y_hat.values.astype(np.float64))
    out = FieldGrid(resid.astype(np.float32), ("velocity",), y.extent_m)
    out.meta["mean_abs"] = float(resid.mean())
    return out


@dataclass
class MetricReport:
    mae: float
    rmse: float
    mre: float
    dataset: str
    family: str
    spec_hash: str
    n_images: int
    excluded_pixels: int
    per_seed: dict[str, list[float]] = field(default_factory=dict)
    std: dict[str, float] = field(default_factory=dict)
    source_family: str | None = None
    target_family: str | None = None
    seeds: int = 1

    def to_json_dict(self) -> dict:
        return dict(self.__dict__)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2),
                              encoding="utf-8")


def _predict_split(ckpt: Checkpoint, manifest: DatasetManifest,
                   samples: list[SamplePair], indices: list[int]):
    """Normalized-[0,1] targets and predictions over a split, concatenated."""
    predictor = Predictor(ckpt)
    v_max = manifest.v_max
    ys, preds = [], []
    for i in indices:
        pred = predictor.predict(samples[i].geometry)
        ys.append(samples[i].flow.channel("velocity") / v_max)
        preds.append(pred.channel("velocity") / v_max)
    return np.stack(ys), np.stack(preds)


def evaluate(checkpoints: Checkpoint | list[Checkpoint],
             manifest: DatasetManifest, samples: list[SamplePair],
             split: str = "test") -> MetricReport:
    """Three-metric report over a split; multi-checkpoint input aggregates seeds.

    Metrics are computed in normalized [0, 1] velocity units over all pixels
    of all images in the split.
    """
    ckpts = checkpoints if isinstance(checkpoints, list) else [checkpoints]
    train_idx, test_idx = manifest.split()
    if split == "test":
        indices = test_idx
    elif split == "train":
        indices = train_idx
    else:
        indices = list(range(manifest.sample_count))
    if not indices:
        raise ValueError(f"split {split!r} is empty")
    eps = MRE_EPS_FRACTION
    per_seed = {"mae": [], "rmse": [], "mre": []}
    excluded = 0
    for ckpt in ckpts:
        y, p = _predict_split(ckpt, manifest, samples, indices)
        per_seed["mae"].append(mae(y, p))
        per_seed["rmse"].append(rmse(y, p))
        per_seed["mre"].append(mre(y, p, eps))
        excluded = mre_excluded_count(y, eps)
    report = MetricReport(
        mae=float(np.mean(per_seed["mae"])),
        rmse=float(np.mean(per_seed["rmse"])),
        mre=float(np.mean(per_seed["mre"])),
        dataset=manifest.name,
        family=manifest.family,
        spec_hash=ckpts[0].spec_hash(),
        n_images=len(indices),
        excluded_pixels=excluded,
        per_seed=per_seed,
        std={k: float(np.std(v)) for k, v in per_seed.items()},
        seeds=len(ckpts),
    )
    return report


def cross_evaluate(checkpoints: Checkpoint | list[Checkpoint],
                   manifest: DatasetManifest, samples: list[SamplePair],
                   split: str = "test") -> MetricReport:
    """Evaluate on a dataset family the checkpoint was not trained on."""
    ckpts = checkpoints if isinstance(checkpoints, list) else [checkpoints]
    report = evaluate(ckpts, manifest, samples, split)
    report.source_family = ckpts[0].norm.get("family")
    report.target_family = manifest.family
    return report

"""Named study grids: train a flag matrix with several seeds, tabulate metrics."""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

# Rows follow the corresponding study tables; values are train-flag overrides.
TABLES: dict[str, dict[str, dict]] = {
    "sn": {
        "pix2pix": {"arch": "pix2pix"},
        "pix2pix_sn": {"arch": "pix2pix", "sn": True},
    },
    "positional": {
        f"{row}|{col}": {**row_flags, **col_flags}
        for row, row_flags in {
            "pix2pix": {"arch": "pix2pix"},
            "pix2pix_sn": {"arch": "pix2pix", "sn": True},
            "cyclegan": {"arch": "cyclegan"},
            "unet": {"arch": "unet"},
        }.items()
        for col, col_flags in {
            "none": {},
            "sdf": {"sdf": True},
            "coordconv": {"coordconv": True},
            "sdf_coordconv": {"sdf": True, "coordconv": True},
        }.items()
    },
    "attention": {
        "self_D": {"arch": "pix2pix", "sn": True, "attention": "self", "att_place": "D"},
        "self_G": {"arch": "pix2pix", "sn": True, "attention": "self", "att_place": "G"},
        "self_both": {"arch": "pix2pix", "sn": True, "attention": "self", "att_place": "both"},
        "self_G_pos": {"arch": "pix2pix", "sn": True, "attention": "self",
                       "att_place": "G", "sdf": True, "coordconv": True},
        "cbam_D": {"arch": "pix2pix", "sn": True, "attention": "cbam", "att_place": "D"},
        "cbam_G": {"arch": "pix2pix", "sn": True, "attention": "cbam", "att_place": "G"},
        "cbam_both": {"arch": "pix2pix", "sn": True, "attention": "cbam", "att_place": "both"},
        "cbam_G_pos": {"arch": "pix2pix", "sn": True, "attention": "cbam",
                       "att_place": "G", "sdf": True, "coordconv": True},
    },
}


def _run_cell(task: tuple) -> tuple[str, int, dict]:
    cell, seed, data_dir, flags, knobs = task
    from windcomfort.metrics import evaluate
    from windcomfort.nets import DiscriminatorSpec, GeneratorSpec
    from windcomfort.raster import read_dataset
    from windcomfort.training import (TrainConfig, train_cyclegan, train_pix2pix,
                                      train_unet)

    manifest, samples = read_dataset(data_dir)
    arch = flags.get("arch", "pix2pix")
    depth = knobs["depth"]
    attention = flags.get("attention", "none")
    att_place = flags.get("att_place", "G")
    placement = tuple(j for j in (depth - 3, depth - 2) if j >= 1)
    gen_spec = GeneratorSpec(
        family="resnet9" if arch == "cyclegan" else "unet",
        in_channels=len(manifest.channel_schema),
        base_filters=knobs["base_filters"], depth=depth, dropout_p=0.5,
        attention=attention if att_place in ("G", "both") else "none",
        attention_placement=placement if (attention != "none"
                                          and att_place in ("G", "both")) else (),
        coordconv_first=flags.get("coordconv", False),
        sdf_channel=flags.get("sdf", False))
    cfg = TrainConfig(epochs=knobs["epochs"], flat_epochs=knobs["flat_epochs"],
                      seed=seed, eval_every=max(knobs["epochs"], 1))
    if arch == "unet":
        result = train_unet(manifest, samples, gen_spec, cfg)
    else:
        disc_spec = DiscriminatorSpec(
            in_channels=(gen_spec.model_in_channels + 1 if arch == "pix2pix" else 1),
            spectral_norm=flags.get("sn", False),
            attention=attention if att_place in ("D", "both") else "none",
            coordconv_first=flags.get("coordconv", False))
        fn = train_pix2pix if arch == "pix2pix" else train_cyclegan
        result = fn(manifest, samples, gen_spec, disc_spec, cfg)
    report = evaluate(result.checkpoint, manifest, samples, split="test")
    return cell, seed, {"mae": report.mae, "rmse": report.rmse, "mre": report.mre}


def run_table(table: str, data_dir: str, out: Path, seeds: int = 3,
              epochs: int = 10, flat_epochs: int = 8, base_filters: int = 16,
              depth: int = 5, jobs: int = 1) -> dict:
    if table not in TABLES:
        raise ValueError(f"unknown table {table!r}")
    knobs = {"epochs": epochs, "flat_epochs": flat_epochs,
             "base_filters": base_filters, "depth": depth}
    tasks = [(cell, seed, data_dir, flags, knobs)
             for cell, flags in TABLES[table].items()
             for seed in range(seeds)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, tasks))
    else:
        results = [_run_cell(t) for t in tasks]

    per_cell: dict[str, dict[int, dict]] = {}
    for cell, seed, metrics in results:
        per_cell.setdefault(cell, {})[seed] = metrics
    cells = {}
    for cell, by_seed in per_cell.items():
        cells[cell] = {}
        for metric in ("mae", "rmse", "mre"):
            vals = [by_seed[s][metric] for s in sorted(by_seed)]
            cells[cell][metric] = {"mean": float(np.mean(vals)),
                                   "std": float(np.std(vals)), "values": vals}
    payload = {"table": table, "dataset": str(data_dir),
               "meta": {"seeds_per_cell": seeds, **knobs}, "cells": cells}
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{table}.json").write_text(json.dumps(payload, indent=2),
                                       encoding="utf-8")
    return payload

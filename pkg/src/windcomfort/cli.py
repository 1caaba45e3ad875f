"""Command-line entry point: data generation, training, evaluation, serving."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from windcomfort.errors import WindcomfortError

log = logging.getLogger("windcomfort")

EXIT_OK = 0
EXIT_USER = 1
EXIT_INTERNAL = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 by default; user errors are 1
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(WindcomfortError):
    pass


def _emit(args, payload: dict) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=2))
    else:
        for key, value in payload.items():
            print(f"{key}: {value}")


def _guard_out(path: Path, force: bool, what: str = "output") -> None:
    if path.exists() and not force:
        if path.is_dir() and not any(path.iterdir()):
            return
        raise _UsageError(f"{what} {path} exists; pass --force to overwrite")


def _solver_config(args):
    from windcomfort.oracle import SolverConfig

    return SolverConfig(grid=args.grid, max_steps=args.max_steps,
                        tol=args.tol, v_ref=args.v_ref)


def cmd_gen_data(args) -> int:
    from windcomfort.oracle import FamilySpec, generate
    from windcomfort.raster import write_dataset

    out = Path(args.out)
    _guard_out(out, args.force, "dataset directory")
    spec = FamilySpec(family=args.family, count=args.count, seed=args.seed)
    manifest, samples = generate(spec, _solver_config(args), n_bins=args.bins,
                                 split_seed=args.split_seed)
    write_dataset(manifest, samples, out, previews=args.previews)
    _emit(args, {"name": manifest.name, "family": manifest.family,
                 "samples": manifest.sample_count, "v_max": manifest.v_max,
                 "n_bins": manifest.n_bins,
                 "channel_schema": list(manifest.channel_schema),
                 "extent_m": manifest.extent_m, "out": str(out)})
    return EXIT_OK


def _gen_spec_from_args(args, manifest):
    from windcomfort.nets import GeneratorSpec

    family = "resnet9" if args.arch == "cyclegan" else "unet"
    in_channels = len(manifest.channel_schema)
    placement = ()
    if args.attention != "none" and args.att_place in ("G", "both"):
        placement = tuple(j for j in (args.depth - 3, args.depth - 2) if j >= 1)
    return GeneratorSpec(
        family=family, in_channels=in_channels, base_filters=args.base_filters,
        depth=args.depth, dropout_p=args.dropout,
        attention=args.attention if args.att_place in ("G", "both") else "none",
        attention_placement=placement, coordconv_first=args.coordconv,
        sdf_channel=args.sdf)


def _disc_spec_from_args(args, gen_spec):
    from windcomfort.nets import DiscriminatorSpec

    cond_channels = gen_spec.model_in_channels
    in_channels = cond_channels + 1 if args.arch == "pix2pix" else 1
    return DiscriminatorSpec(
        in_channels=in_channels, spectral_norm=args.sn,
        attention=args.attention if args.att_place in ("D", "both") else "none",
        coordconv_first=args.coordconv)


def cmd_train(args) -> int:
    from windcomfort.raster import read_dataset
    from windcomfort.training import (TrainConfig, train_cyclegan, train_pix2pix,
                                      train_unet)

    if args.arch == "unet" and args.sn:
        raise _UsageError("--sn applies to the discriminator; unet has none")
    if args.arch == "unet" and args.att_place in ("D", "both") and args.attention != "none":
        raise _UsageError("unet has no discriminator for --att-place D/both")
    out = Path(args.out)
    _guard_out(out, args.force, "checkpoint")
    manifest, samples = read_dataset(args.data)
    gen_spec = _gen_spec_from_args(args, manifest)
    cfg = TrainConfig(lr=args.lr, batch_size=args.batch_size, epochs=args.epochs,
                      flat_epochs=args.flat_epochs, seed=args.seed,
                      eval_every=args.eval_every,
                      checkpoint_dir=args.checkpoint_dir,
                      log_path=args.log or None)
    if args.arch == "unet":
        result = train_unet(manifest, samples, gen_spec, cfg, out_path=out)
    elif args.arch == "pix2pix":
        result = train_pix2pix(manifest, samples, gen_spec,
                               _disc_spec_from_args(args, gen_spec), cfg,
                               out_path=out)
    else:
        result = train_cyclegan(manifest, samples, gen_spec,
                                _disc_spec_from_args(args, gen_spec), cfg,
                                out_path=out)
    last = result.history[-1] if result.history else {}
    _emit(args, {"arch": args.arch, "out": str(out), "epochs": args.epochs,
                 "g_updates": result.g_updates,
                 "final": {k: v for k, v in last.items() if not isinstance(v, dict)},
                 "log": result.log_path})
    return EXIT_OK


def _load_checkpoints(paths):
    from windcomfort.training import load_checkpoint

    return [load_checkpoint(p) for p in paths]


def cmd_eval(args, cross: bool = False) -> int:
    from windcomfort.metrics import cross_evaluate, evaluate
    from windcomfort.raster import read_dataset

    for target in (args.out, args.csv):
        if target:
            _guard_out(Path(target), args.force, "metrics file")
    manifest, samples = read_dataset(args.data)
    ckpts = _load_checkpoints(args.ckpt)
    fn = cross_evaluate if cross else evaluate
    report = fn(ckpts, manifest, samples, split=args.split)
    if args.out:
        report.write(args.out)
    if args.csv:
        _write_per_sample_csv(args.csv, ckpts[0], manifest, samples, args.split)
    _emit(args, report.to_json_dict())
    return EXIT_OK


def _write_per_sample_csv(path, ckpt, manifest, samples, split) -> None:
    import csv

    from windcomfort.metrics import MRE_EPS_FRACTION, mae, mre, rmse
    from windcomfort.training import Predictor

    train_idx, test_idx = manifest.split()
    indices = test_idx if split == "test" else train_idx
    predictor = Predictor(ckpt)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample", "mae", "rmse", "mre"])
        for i in indices:
            y = samples[i].flow.channel("velocity") / manifest.v_max
            p = predictor.predict(samples[i].geometry).channel("velocity") / manifest.v_max
            writer.writerow([manifest.samples[i], mae(y, p), rmse(y, p),
                             mre(y, p, MRE_EPS_FRACTION)])


def cmd_ablate(args) -> int:
    from windcomfort.ablate import run_table

    out = Path(args.out)
    _guard_out(out, args.force, "ablation output")
    table = run_table(args.table, args.data, out, seeds=args.seeds,
                      epochs=args.epochs, flat_epochs=args.flat_epochs,
                      base_filters=args.base_filters, depth=args.depth,
                      jobs=args.jobs)
    _emit(args, table)
    return EXIT_OK


def cmd_predict(args) -> int:
    from windcomfort.comfort import predict_direction
    from windcomfort.raster import Scene, rasterize
    from windcomfort.render import save_png
    from windcomfort.training import Predictor, load_checkpoint

    ckpt = load_checkpoint(args.ckpt)
    predictor = Predictor(ckpt)
    scene = Scene.from_json_dict(json.loads(Path(args.scene).read_text()))
    with_height = "height" in ckpt.norm.get("channel_schema", [])
    geometry = rasterize(scene, args.size, include_height=with_height)
    flow = predict_direction(predictor, geometry, args.sector)
    out = Path(args.out)
    _guard_out(out, args.force, "prediction")
    if out.suffix == ".png":
        save_png(out, flow.channel("velocity"), vmax=ckpt.norm["v_max"])
    else:
        from windcomfort.raster import SamplePair, write_sample
        write_sample(out, SamplePair(geometry=geometry, flow=flow))
    _emit(args, {"out": str(out), "sector": args.sector,
                 "mean_ms": float(flow.channel("velocity").mean()),
                 "max_ms": float(flow.channel("velocity").max())})
    return EXIT_OK


def cmd_comfort(args) -> int:
    from windcomfort.comfort import ComfortCriteria, WindRose, comfort_map
    from windcomfort.raster import Scene, rasterize
    from windcomfort.training import Predictor, load_checkpoint

    ckpt = load_checkpoint(args.ckpt)
    predictor = Predictor(ckpt)
    scene = Scene.from_json_dict(json.loads(Path(args.scene).read_text()))
    with_height = "height" in ckpt.norm.get("channel_schema", [])
    geometry = rasterize(scene, args.size, include_height=with_height)
    rose = WindRose.load(args.rose)
    criteria = (ComfortCriteria.from_json_dict(json.loads(Path(args.criteria).read_text()))
                if args.criteria else ComfortCriteria())
    cmap = comfort_map(predictor, geometry, rose, criteria)
    out = Path(args.out)
    _guard_out(out, args.force, "comfort map")
    cmap.write(out)
    _emit(args, {"out": str(out), "sidecar": str(out.with_suffix(".json")),
                 "histogram": cmap.histogram()})
    return EXIT_OK


def cmd_serve(args) -> int:
    from windcomfort.server import ServiceConfig, run

    if args.config:
        config = ServiceConfig.load(args.config)
    else:
        checkpoints = dict(pair.split("=", 1) for pair in args.ckpt)
        config = ServiceConfig(checkpoints=checkpoints, host=args.host,
                               port=args.port)
    run(config)
    return EXIT_OK


def build_parser() -> _Parser:
    p = _Parser(prog="windcomfort",
                description="surrogate wind-flow prediction and comfort mapping")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="generate a dataset with the flow oracle")
    g.add_argument("--family", required=True,
                   choices=["wall", "single", "two", "two_height", "urban"])
    g.add_argument("--count", type=int, default=64)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--split-seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--grid", type=int, default=128)
    g.add_argument("--bins", type=int, default=20)
    g.add_argument("--v-ref", type=float, default=5.0)
    g.add_argument("--max-steps", type=int, default=20000)
    g.add_argument("--tol", type=float, default=1e-6)
    g.add_argument("--previews", action="store_true")
    g.add_argument("--force", action="store_true")
    g.add_argument("--json", action="store_true")
    g.set_defaults(fn=cmd_gen_data)

    t = sub.add_parser("train", help="train an architecture on a dataset")
    t.add_argument("--arch", required=True, choices=["pix2pix", "cyclegan", "unet"])
    t.add_argument("--data", required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--sn", action="store_true", help="spectral norm in D")
    t.add_argument("--sdf", action="store_true", help="extra SDF input channel")
    t.add_argument("--coordconv", action="store_true",
                   help="coordinate channels at the first conv of G and D")
    t.add_argument("--attention", choices=["none", "self", "cbam"], default="none")
    t.add_argument("--att-place", choices=["G", "D", "both"], default="G")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--epochs", type=int, default=70)
    t.add_argument("--flat-epochs", type=int, default=50)
    t.add_argument("--lr", type=float, default=2e-4)
    t.add_argument("--batch-size", type=int, default=1)
    t.add_argument("--base-filters", type=int, default=64)
    t.add_argument("--depth", type=int, default=8)
    t.add_argument("--dropout", type=float, default=0.5)
    t.add_argument("--eval-every", type=int, default=1)
    t.add_argument("--checkpoint-dir", default=None)
    t.add_argument("--log", default=None)
    t.add_argument("--force", action="store_true")
    t.add_argument("--json", action="store_true")
    t.set_defaults(fn=cmd_train)

    for name, cross in (("eval", False), ("cross-eval", True)):
        e = sub.add_parser(name, help="compute metrics for checkpoints")
        e.add_argument("--ckpt", required=True, nargs="+")
        e.add_argument("--data", required=True)
        e.add_argument("--split", choices=["test", "train", "all"], default="test")
        e.add_argument("--out", default=None, help="metrics.json path")
        e.add_argument("--csv", default=None, help="per-sample csv path")
        e.add_argument("--force", action="store_true")
        e.add_argument("--json", action="store_true")
        e.set_defaults(fn=lambda a, cross=cross: cmd_eval(a, cross=cross))

    a = sub.add_parser("ablate", help="run a named study grid with 3 seeds")
    a.add_argument("--table", required=True, choices=["sn", "positional", "attention"])
    a.add_argument("--data", required=True)
    a.add_argument("--out", required=True)
    a.add_argument("--seeds", type=int, default=3)
    a.add_argument("--epochs", type=int, default=10)
    a.add_argument("--flat-epochs", type=int, default=8)
    a.add_argument("--base-filters", type=int, default=16)
    a.add_argument("--depth", type=int, default=5)
    a.add_argument("--jobs", type=int, default=1)
    a.add_argument("--force", action="store_true")
    a.add_argument("--json", action="store_true")
    a.set_defaults(fn=cmd_ablate)

    pr = sub.add_parser("predict", help="predict flow for a scene JSON")
    pr.add_argument("--ckpt", required=True)
    pr.add_argument("--scene", required=True)
    pr.add_argument("--sector", default="W")
    pr.add_argument("--size", type=int, default=256)
    pr.add_argument("--out", required=True)
    pr.add_argument("--force", action="store_true")
    pr.add_argument("--json", action="store_true")
    pr.set_defaults(fn=cmd_predict)

    c = sub.add_parser("comfort", help="compute a comfort map for a scene")
    c.add_argument("--ckpt", required=True)
    c.add_argument("--scene", required=True)
    c.add_argument("--rose", required=True)
    c.add_argument("--criteria", default=None)
    c.add_argument("--size", type=int, default=256)
    c.add_argument("--out", required=True)
    c.add_argument("--force", action="store_true")
    c.add_argument("--json", action="store_true")
    c.set_defaults(fn=cmd_comfort)

    s = sub.add_parser("serve", help="run the prediction service")
    s.add_argument("--config", default=None,
                   help=f"service config JSON (default: ${'WINDCOMFORT_CONFIG'})")
    s.add_argument("--ckpt", nargs="*", default=[], metavar="NAME=PATH")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8710)
    s.set_defaults(fn=cmd_serve)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    np.seterr(all="ignore")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except WindcomfortError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except Exception as exc:  # noqa: BLE001 - last-resort internal error path
        log.exception("internal error: %s", exc)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

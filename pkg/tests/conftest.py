import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from windcomfort.nets import GeneratorSpec
from windcomfort.oracle import FamilySpec, SolverConfig, generate
from windcomfort.raster import write_dataset
from windcomfort.training import TrainConfig, train_unet

# Desk-scale fixture knobs: small grids and short solves keep the suite fast
# while exercising the full pipeline.
DESK_GRID = 48
DESK_SOLVER = dict(grid=DESK_GRID, max_steps=2500, tol=1e-5, check_every=100)


@pytest.fixture(scope="session")
def desk_dataset(tmp_path_factory):
    """(manifest, samples, dir): 10 two-building scenes at 48x48."""
    out = tmp_path_factory.mktemp("desk-two")
    spec = FamilySpec(family="two", count=10, seed=11)
    manifest, samples = generate(spec, SolverConfig(**DESK_SOLVER))
    write_dataset(manifest, samples, out)
    return manifest, samples, out


@pytest.fixture(scope="session")
def desk_dataset64(tmp_path_factory):
    """10 scenes at 64x64 for the descent checks (8 land in the train split)."""
    out = tmp_path_factory.mktemp("desk-two-64")
    spec = FamilySpec(family="two", count=10, seed=23)
    manifest, samples = generate(
        spec, SolverConfig(grid=64, max_steps=3000, tol=1e-5, check_every=100))
    write_dataset(manifest, samples, out)
    return manifest, samples, out


@pytest.fixture(scope="session")
def unet_checkpoint(desk_dataset, tmp_path_factory):
    """A small trained U-Net checkpoint shared by eval/comfort/serve tests."""
    manifest, samples, _ = desk_dataset
    out = tmp_path_factory.mktemp("ckpt") / "unet.wgck"
    gen_spec = GeneratorSpec(family="unet", in_channels=1, base_filters=8,
                             depth=4, dropout_p=0.0)
    cfg = TrainConfig(lr=1e-3, epochs=6, flat_epochs=4, seed=3, eval_every=3)
    result = train_unet(manifest, samples, gen_spec, cfg, out_path=out)
    return result.checkpoint, out

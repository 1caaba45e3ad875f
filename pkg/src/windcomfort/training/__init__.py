"""Training loops, schedule, pools, and checkpoint round-tripping."""

from windcomfort.training.checkpoint import (
    Checkpoint,
    Predictor,
    load_checkpoint,
    save_checkpoint,
)
from windcomfort.training.config import TrainConfig, lr_at_epoch
from windcomfort.training.data import (
    flow_tensor,
    geometry_tensor,
    pack_flow,
    pack_geometry,
    unpack_flow,
)
from windcomfort.training.loops import (
    TrainResult,
    disc_accuracy,
    train_cyclegan,
    train_pix2pix,
    train_unet,
)
from windcomfort.training.pool import ImagePool

__all__ = [
    "Checkpoint", "ImagePool", "Predictor", "TrainConfig", "TrainResult",
    "disc_accuracy", "flow_tensor", "geometry_tensor", "load_checkpoint",
    "lr_at_epoch", "pack_flow", "pack_geometry", "save_checkpoint",
    "train_cyclegan", "train_pix2pix", "train_unet", "unpack_flow",
]

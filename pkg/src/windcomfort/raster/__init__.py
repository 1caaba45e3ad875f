"""Raster layer: scenes, field grids, positional channels, dataset container."""

from windcomfort.raster.dataset import (
    FAMILIES,
    DatasetManifest,
    SamplePair,
    read_dataset,
    read_sample,
    write_dataset,
    write_sample,
)
from windcomfort.raster.grid import (
    CHANNEL_TAGS,
    Building,
    FieldGrid,
    Scene,
    concat_channels,
    polygon_is_simple,
)
from windcomfort.raster.ops import (
    boundary_pixels,
    bucketize,
    coord_channels,
    denormalize,
    grid_diagonal,
    normalize,
    rasterize,
    rotate_field,
    rotate_values,
    signed_distance,
)

__all__ = [
    "CHANNEL_TAGS", "FAMILIES", "Building", "DatasetManifest", "FieldGrid",
    "SamplePair", "Scene", "boundary_pixels", "bucketize", "concat_channels",
    "coord_channels", "denormalize", "grid_diagonal", "normalize",
    "polygon_is_simple", "rasterize", "read_dataset", "read_sample",
    "rotate_field", "rotate_values", "signed_distance", "write_dataset",
    "write_sample",
]

"""Architecture zoo: generators, patch discriminator, attention, spectral norm."""

from windcomfort.nets.blocks import Cbam, SelfAttention, WithCoords, coord_maps, make_attention
from windcomfort.nets.build import (
    ATTENTION_KINDS,
    GENERATOR_FAMILIES,
    DiscriminatorSpec,
    GeneratorSpec,
    build_discriminator,
    build_generator,
    init_weights,
    param_count,
)
from windcomfort.nets.generators import ResnetGenerator, UnetGenerator, encoder_widths
from windcomfort.nets.patchgan import PatchDiscriminator
from windcomfort.nets.sn import SpectralNorm, l2_normalize, spectral_normalize

__all__ = [
    "ATTENTION_KINDS", "Cbam", "DiscriminatorSpec", "GENERATOR_FAMILIES",
    "GeneratorSpec", "PatchDiscriminator", "ResnetGenerator", "SelfAttention",
    "SpectralNorm", "UnetGenerator", "WithCoords", "build_discriminator",
    "build_generator", "coord_maps", "encoder_widths", "init_weights",
    "l2_normalize", "make_attention", "param_count", "spectral_normalize",
]

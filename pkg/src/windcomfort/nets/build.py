"""Model specs, seeded builders, and parameter accounting."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import torch
from torch import nn

from windcomfort.errors import ShapeError
from windcomfort.nets.generators import ResnetGenerator, UnetGenerator
from windcomfort.nets.patchgan import PatchDiscriminator

GENERATOR_FAMILIES = ("unet", "resnet9")
ATTENTION_KINDS = ("none", "self", "cbam")


@dataclass
class GeneratorSpec:
    family: str = "unet"
    in_channels: int = 1
    out_channels: int = 1
    base_filters: int = 64
    depth: int = 8
    dropout_p: float = 0.5
    attention: str = "none"
    attention_placement: tuple[int, ...] = field(default_factory=tuple)
    coordconv_first: bool = False
    sdf_channel: bool = False

    def __post_init__(self):
        self.attention_placement = tuple(self.attention_placement)
        if self.family not in GENERATOR_FAMILIES:
            raise ValueError(f"unknown generator family {self.family!r}")
        if self.attention not in ATTENTION_KINDS:
            raise ValueError(f"unknown attention {self.attention!r}")
        if self.out_channels != 1:
            raise ValueError("generators emit a single velocity channel")
        if self.attention != "none" and not self.attention_placement:
            # Default to the 32x32/64x64 decoder blocks (5 and 6 at depth 8).
            self.attention_placement = tuple(
                j for j in (self.depth - 3, self.depth - 2) if j >= 1) or (1,)

    @property
    def model_in_channels(self) -> int:
        return self.in_channels + (1 if self.sdf_channel else 0)

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["attention_placement"] = list(self.attention_placement)
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "GeneratorSpec":
        d = dict(d)
        d["attention_placement"] = tuple(d.get("attention_placement", ()))
        return cls(**d)


@dataclass
class DiscriminatorSpec:
    in_channels: int = 2
    n_layers: int = 5
    spectral_norm: bool = False
    attention: str = "none"
    attention_placement: tuple[int, ...] = (2, 3)
    coordconv_first: bool = False

    def __post_init__(self):
        self.attention_placement = tuple(self.attention_placement)
        if self.n_layers != 5:
            raise ValueError("the patch discriminator is fixed at 5 conv layers")
        if self.attention not in ATTENTION_KINDS:
            raise ValueError(f"unknown attention {self.attention!r}")

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["attention_placement"] = list(self.attention_placement)
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "DiscriminatorSpec":
        d = dict(d)
        d["attention_placement"] = tuple(d.get("attention_placement", (2, 3)))
        return cls(**d)


def init_weights(model: nn.Module) -> None:
    """Zero-mean Gaussian (std 0.02) on conv weights, zero biases."""
    for m in model.modules():
        if isinstance(m, (nn.Conv2d, nn.ConvTranspose2d)):
            nn.init.normal_(m.weight, 0.0, 0.02)
            if m.bias is not None:
                nn.init.zeros_(m.bias)


def _seeded(builder, seed: int) -> nn.Module:
    with torch.random.fork_rng():
        torch.manual_seed(seed)
        model = builder()
        init_weights(model)
    return model


def build_generator(spec: GeneratorSpec, seed: int = 0) -> nn.Module:
    if spec.family == "unet":
        def builder():
            return UnetGenerator(
                spec.model_in_channels, spec.out_channels, spec.base_filters,
                spec.depth, spec.dropout_p, spec.attention,
                spec.attention_placement, spec.coordconv_first)
    else:
        def builder():
            return ResnetGenerator(
                spec.model_in_channels, spec.out_channels, spec.base_filters,
                spec.dropout_p, spec.coordconv_first)
    return _seeded(builder, seed)


def build_discriminator(spec: DiscriminatorSpec, seed: int = 0) -> nn.Module:
    for k in spec.attention_placement:
        if not 1 <= k <= 5:
            raise ShapeError(f"attention placement {k} outside conv blocks 1..5")

    def builder():
        return PatchDiscriminator(
            spec.in_channels, spec.spectral_norm, spec.attention,
            spec.attention_placement, spec.coordconv_first)
    return _seeded(builder, seed)


def param_count(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters() if p.requires_grad)

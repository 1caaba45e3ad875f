"""Patch discriminator: five convolutions emitting one logit per patch."""

from __future__ import annotations

import torch
from torch import nn

from windcomfort.nets.blocks import WithCoords, make_attention
from windcomfort.nets.sn import SpectralNorm


class PatchDiscriminator(nn.Module):
    """70x70-receptive-field patch classifier (30x30 logit grid at 256 input).

    Filters 64, 128, 256, 512, 1; leaky ReLU between layers; instance norm on
    the middle three. Optional per-layer spectral normalization, coordinate
    channels on the first conv, and attention after blocks 2 and 3.
    """

    def __init__(self, in_channels: int, spectral_norm: bool = False,
                 attention: str = "none", attention_placement: tuple[int, ...] = (2, 3),
                 coordconv_first: bool = False):
        super().__init__()

        def conv(cin, cout, stride):
            c = nn.Conv2d(cin, cout, 4, stride, 1)
            return SpectralNorm(c) if spectral_norm else c

        first = conv(in_channels + (2 if coordconv_first else 0), 64, 2)
        if coordconv_first:
            first = WithCoords(first)
        blocks = [
            nn.Sequential(first, nn.LeakyReLU(0.2)),
            nn.Sequential(conv(64, 128, 2), nn.InstanceNorm2d(128), nn.LeakyReLU(0.2)),
            nn.Sequential(conv(128, 256, 2), nn.InstanceNorm2d(256), nn.LeakyReLU(0.2)),
            nn.Sequential(conv(256, 512, 1), nn.InstanceNorm2d(512), nn.LeakyReLU(0.2)),
            nn.Sequential(conv(512, 1, 1)),
        ]
        self.blocks = nn.ModuleList(blocks)
        self.attn = nn.ModuleList([
            (make_attention(attention, [64, 128, 256, 512, 1][k - 1]) or nn.Identity())
            if k in attention_placement and attention != "none" else nn.Identity()
            for k in range(1, 6)
        ])

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        out = x
        for block, attn in zip(self.blocks, self.attn):
            out = attn(block(out))
        return out

    def sn_sigmas(self) -> dict[str, float]:
        """Effective spectral norms (tracking quality), keyed by module path."""
        return {name: m.effective_sigma() for name, m in self.named_modules()
                if isinstance(m, SpectralNorm)}

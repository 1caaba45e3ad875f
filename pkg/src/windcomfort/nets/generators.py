"""Generator architectures: skip-connected U-Net and the residual translator."""

from __future__ import annotations

import torch
from torch import nn

from windcomfort.errors import ShapeError
from windcomfort.nets.blocks import WithCoords, make_attention


def _norm(channels: int) -> nn.Module:
    return nn.InstanceNorm2d(channels)


def encoder_widths(base: int, depth: int) -> list[int]:
    return [base * min(2 ** k, 8) for k in range(depth)]


class UnetGenerator(nn.Module):
    """Stride-2 encoder/decoder with channel-concat skips between layers i and n-i.

    Encoder block k: LeakyReLU(0.2) -> Conv4x4/2 -> InstanceNorm, where the
    outermost block drops the activation and the outermost/innermost drop the
    norm. Decoder block j: ReLU -> ConvT4x4/2 -> InstanceNorm (+ dropout on the
    three innermost), tanh on the outermost instead.
    """

    def __init__(self, in_channels: int, out_channels: int = 1, base: int = 64,
                 depth: int = 8, dropout_p: float = 0.5,
                 attention: str = "none", attention_placement: tuple[int, ...] = (),
                 coordconv_first: bool = False):
        super().__init__()
        if depth < 1:
            raise ShapeError("depth must be >= 1")
        for j in attention_placement:
            if not 1 <= j <= depth:
                raise ShapeError(f"attention placement {j} outside decoder range 1..{depth}")
        widths = encoder_widths(base, depth)
        self.depth = depth

        downs = []
        prev = in_channels
        for k in range(depth):
            layers: list[nn.Module] = []
            if k > 0:
                layers.append(nn.LeakyReLU(0.2))
            conv: nn.Module = nn.Conv2d(prev + (2 if coordconv_first and k == 0 else 0),
                                        widths[k], 4, 2, 1)
            if coordconv_first and k == 0:
                conv = WithCoords(conv)
            layers.append(conv)
            if 0 < k < depth - 1:
                layers.append(_norm(widths[k]))
            downs.append(nn.Sequential(*layers))
            prev = widths[k]
        self.downs = nn.ModuleList(downs)

        ups = []
        attn = []
        for j in range(1, depth + 1):  # 1 = innermost
            in_ch = widths[depth - 1] if j == 1 else widths[depth - j] * 2
            out_ch = out_channels if j == depth else widths[depth - 1 - j]
            layers = [nn.ReLU()]
            layers.append(nn.ConvTranspose2d(in_ch, out_ch, 4, 2, 1))
            if j < depth:
                layers.append(_norm(out_ch))
                if dropout_p > 0 and j <= 3:
                    layers.append(nn.Dropout(dropout_p))
            else:
                layers.append(nn.Tanh())
            ups.append(nn.Sequential(*layers))
            attn.append(make_attention(attention, out_ch)
                        if j in attention_placement and j < depth else None)
        self.ups = nn.ModuleList(ups)
        self.attn = nn.ModuleList([a if a is not None else nn.Identity() for a in attn])

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h, w = x.shape[2], x.shape[3]
        if h % (2 ** self.depth) or w % (2 ** self.depth):
            raise ShapeError(f"{h}x{w} input not divisible by 2^{self.depth}")
        skips = []
        out = x
        for down in self.downs:
            out = down(out)
            skips.append(out)
        for j, (up, attn) in enumerate(zip(self.ups, self.attn), start=1):
            inp = out if j == 1 else torch.cat([out, skips[self.depth - j]], dim=1)
            out = attn(up(inp))
        return out


class ResidualBlock(nn.Module):
    def __init__(self, channels: int, dropout_p: float):
        super().__init__()
        layers: list[nn.Module] = [
            nn.ReflectionPad2d(1), nn.Conv2d(channels, channels, 3),
            _norm(channels), nn.ReLU(),
        ]
        if dropout_p > 0:
            layers.append(nn.Dropout(dropout_p))
        layers += [nn.ReflectionPad2d(1), nn.Conv2d(channels, channels, 3),
                   _norm(channels)]
        self.body = nn.Sequential(*layers)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x + self.body(x)


class ResnetGenerator(nn.Module):
    """7x7 stem, two stride-2 downs, nine residual blocks, two transposed ups."""

    N_BLOCKS = 9

    def __init__(self, in_channels: int, out_channels: int = 1, base: int = 64,
                 dropout_p: float = 0.5, coordconv_first: bool = False):
        super().__init__()
        stem: nn.Module = nn.Conv2d(in_channels + (2 if coordconv_first else 0),
                                    base, 7)
        if coordconv_first:
            stem = WithCoords(stem)
        layers: list[nn.Module] = [nn.ReflectionPad2d(3), stem, _norm(base), nn.ReLU()]
        ch = base
        for _ in range(2):
            layers += [nn.Conv2d(ch, ch * 2, 3, 2, 1), _norm(ch * 2), nn.ReLU()]
            ch *= 2
        layers += [ResidualBlock(ch, dropout_p) for _ in range(self.N_BLOCKS)]
        for _ in range(2):
            layers += [nn.ConvTranspose2d(ch, ch // 2, 3, 2, 1, output_padding=1),
                       _norm(ch // 2), nn.ReLU()]
            ch //= 2
        layers += [nn.ReflectionPad2d(3), nn.Conv2d(ch, out_channels, 7), nn.Tanh()]
        self.body = nn.Sequential(*layers)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[2] % 4 or x.shape[3] % 4:
            raise ShapeError("input H, W must be divisible by 4")
        return self.body(x)

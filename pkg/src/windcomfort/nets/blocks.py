"""Reusable layers: coordinate concat, self-attention, CBAM."""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from windcomfort.errors import ShapeError


def coord_maps(h: int, w: int, dtype=torch.float32, device=None) -> torch.Tensor:
    """Row/column index maps normalized to [-1, 1], shape (2, H, W)."""
    rows = torch.arange(h, dtype=dtype, device=device)
    cols = torch.arange(w, dtype=dtype, device=device)
    ci = 2.0 * rows / (h - 1) - 1.0 if h > 1 else torch.zeros(1, dtype=dtype, device=device)
    cj = 2.0 * cols / (w - 1) - 1.0 if w > 1 else torch.zeros(1, dtype=dtype, device=device)
    coord_i = ci[:, None].expand(h, w)
    coord_j = cj[None, :].expand(h, w)
    return torch.stack([coord_i, coord_j])


class WithCoords(nn.Module):
    """Concatenates the two coordinate channels before the wrapped layer."""

    def __init__(self, module: nn.Module):
        super().__init__()
        self.module = module

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        coords = coord_maps(x.shape[2], x.shape[3], dtype=x.dtype, device=x.device)
        coords = coords.unsqueeze(0).expand(x.shape[0], -1, -1, -1)
        return self.module(torch.cat([x, coords], dim=1))


class SelfAttention(nn.Module):
    """Position-wise soft attention with a learnable residual scale.

    gamma starts at zero, so the block is an exact identity at initialization
    and learns how much attention to mix in.
    """

    def __init__(self, channels: int):
        super().__init__()
        if channels % 8 != 0:
            raise ShapeError(f"self-attention needs channels divisible by 8, got {channels}")
        inner = channels // 8
        self.query = nn.Conv2d(channels, inner, 1)
        self.key = nn.Conv2d(channels, inner, 1)
        self.value = nn.Conv2d(channels, channels, 1)
        self.gamma = nn.Parameter(torch.zeros(()))

    def attention_weights(self, x: torch.Tensor) -> torch.Tensor:
        b, _, h, w = x.shape
        q = self.query(x).flatten(2)          # b x c' x hw
        k = self.key(x).flatten(2)
        return torch.softmax(q.transpose(1, 2) @ k, dim=-1)  # rows sum to 1

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        b, c, h, w = x.shape
        attn = self.attention_weights(x)
        v = self.value(x).flatten(2)          # b x c x hw
        out = (v @ attn.transpose(1, 2)).reshape(b, c, h, w)
        return x + self.gamma * out


class Cbam(nn.Module):
    """Channel gate then spatial gate, each multiplied elementwise."""

    def __init__(self, channels: int, reduction: int = 16, spatial_kernel: int = 7):
        super().__init__()
        if channels < 2:
            raise ShapeError(f"channel attention needs >= 2 channels, got {channels}")
        hidden = max(channels // reduction, 1)
        self.mlp = nn.Sequential(
            nn.Conv2d(channels, hidden, 1, bias=False),
            nn.ReLU(inplace=True),
            nn.Conv2d(hidden, channels, 1, bias=False),
        )
        self.spatial_conv = nn.Conv2d(2, 1, spatial_kernel,
                                      padding=spatial_kernel // 2, bias=False)

    def channel_gate(self, x: torch.Tensor) -> torch.Tensor:
        avg = self.mlp(F.adaptive_avg_pool2d(x, 1))
        mx = self.mlp(F.adaptive_max_pool2d(x, 1))
        return torch.sigmoid(avg + mx)        # C x 1 x 1 per item

    def spatial_gate(self, x: torch.Tensor) -> torch.Tensor:
        stacked = torch.cat([x.mean(dim=1, keepdim=True),
                             x.amax(dim=1, keepdim=True)], dim=1)
        return torch.sigmoid(self.spatial_conv(stacked))  # 1 x H x W per item

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        refined = self.channel_gate(x) * x
        return self.spatial_gate(refined) * refined


def make_attention(kind: str, channels: int) -> nn.Module | None:
    if kind == "none":
        return None
    if kind == "self":
        return SelfAttention(channels)
    if kind == "cbam":
        return Cbam(channels)
    raise ValueError(f"unknown attention kind {kind!r}")

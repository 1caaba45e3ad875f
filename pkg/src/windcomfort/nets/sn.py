"""Spectral normalization via power iteration."""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from windcomfort.errors import DegenerateWeight

_EPS = 1e-12


def l2_normalize(v: torch.Tensor) -> torch.Tensor:
    return v / (v.norm() + _EPS)


def spectral_normalize(weight: torch.Tensor, u: torch.Tensor):
    """One power-iteration step on a 2D weight (rows = output features).

    Returns (normalized weight, updated u, sigma estimate). At convergence the
    largest singular value of the returned weight is 1.
    """
    if weight.ndim != 2:
        raise ValueError("weight must be reshaped to 2D (out x fan-in)")
    wtu = weight.t().mv(u)
    if wtu.norm() == 0:
        # Unlucky u exactly in the null space: re-randomize deterministically.
        gen = torch.Generator().manual_seed(weight.shape[0] * 9176 + weight.shape[1])
        u = l2_normalize(torch.randn(weight.shape[0], generator=gen,
                                     dtype=weight.dtype))
        wtu = weight.t().mv(u)
        if wtu.norm() == 0:
            raise DegenerateWeight("weight matrix is zero")
    v = l2_normalize(wtu)
    u_new = l2_normalize(weight.mv(v))
    sigma = torch.dot(u_new, weight.mv(v))
    return weight / sigma, u_new, sigma


class SpectralNorm(nn.Module):
    """Wraps a conv so its weight is divided by the spectral-norm estimate.

    The left singular vector u advances one power-iteration step on every
    training-mode forward; eval reuses the stored u, keeping inference
    deterministic. Gradients flow through the weight only (u, v detached),
    matching the reference treatment in the GAN literature.
    """

    def __init__(self, module: nn.Module):
        super().__init__()
        self.module = module
        out_features = module.weight.shape[0]
        gen = torch.Generator().manual_seed(out_features * 7919 + module.weight.numel())
        self.register_buffer("u", l2_normalize(torch.randn(out_features, generator=gen)))
        self.register_buffer("sigma_hat", torch.ones(()))

    def _normalized_weight(self) -> torch.Tensor:
        w = self.module.weight
        w2d = w.reshape(w.shape[0], -1)
        if self.training:
            with torch.no_grad():
                _, u_new, _ = spectral_normalize(w2d, self.u)
                self.u.copy_(u_new)
        # Cloning keeps later buffer updates from invalidating graphs saved by
        # earlier forwards in the same step (D runs several per iteration).
        u = self.u.detach().clone()
        v = l2_normalize(w2d.detach().t().mv(u))
        sigma = torch.dot(u, w2d.mv(v))
        with torch.no_grad():
            self.sigma_hat.copy_(sigma)
        return (w / sigma).reshape(w.shape)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        w = self._normalized_weight()
        m = self.module
        if isinstance(m, nn.Conv2d):
            return F.conv2d(x, w, m.bias, m.stride, m.padding, m.dilation, m.groups)
        if isinstance(m, nn.ConvTranspose2d):
            return F.conv_transpose2d(x, w, m.bias, m.stride, m.padding,
                                      m.output_padding, m.groups, m.dilation)
        raise TypeError(f"SpectralNorm does not support {type(m).__name__}")

    @torch.no_grad()
    def effective_sigma(self, refine: int = 10) -> float:
        """Spectral norm of the weight the next forward would apply.

        Compares a refined power-iteration estimate against the tracked one;
        values near 1 mean u is following the training updates.
        """
        w2d = self.module.weight.detach().reshape(self.module.weight.shape[0], -1)
        _, u, sigma_tracked = spectral_normalize(w2d, self.u)
        for _ in range(refine):
            _, u, sigma_refined = spectral_normalize(w2d, u)
        return float(sigma_refined / sigma_tracked)

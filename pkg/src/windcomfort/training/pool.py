"""Replay buffer of past generator outputs for discriminator updates."""

from __future__ import annotations

import numpy as np
import torch


class ImagePool:
    """Fixed-capacity pool with the half-swap replay rule.

    While filling, every fresh fake is stored and returned as-is. Once full,
    a fair coin decides between returning the fresh fake unchanged and
    swapping it against a uniformly random stored one (returning the evictee).
    """

    def __init__(self, capacity: int, rng: np.random.Generator | None = None):
        self.capacity = capacity
        self.buffer: list[torch.Tensor] = []
        self.rng = rng if rng is not None else np.random.default_rng()

    def __len__(self) -> int:
        return len(self.buffer)

    def query(self, fresh: torch.Tensor) -> torch.Tensor:
        if self.capacity <= 0:
            return fresh
        if len(self.buffer) < self.capacity:
            self.buffer.append(fresh.detach().clone())
            return fresh
        if self.rng.random() < 0.5:
            return fresh
        idx = int(self.rng.integers(self.capacity))
        evicted = self.buffer[idx]
        self.buffer[idx] = fresh.detach().clone()
        return evicted

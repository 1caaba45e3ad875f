"""Training configuration and the learning-rate schedule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class TrainConfig:
    lr: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    batch_size: int = 1
    epochs: int = 70
    flat_epochs: int = 50
    pool_size: int = 50
    seed: int = 0
    eval_every: int = 1
    checkpoint_dir: str | None = None
    log_path: str | None = None
    lambda_l1: float = 100.0
    lambda_cycle: float = 10.0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0 <= self.flat_epochs <= self.epochs:
            raise ValueError("flat phase cannot exceed total epochs")

    @property
    def decay_epochs(self) -> int:
        return self.epochs - self.flat_epochs

    def derived_seeds(self) -> dict[str, int]:
        """Independent streams so ablations share initializations."""
        children = np.random.SeedSequence(self.seed).spawn(4)
        names = ("shuffle", "init", "dropout", "pool")
        return {n: int(c.generate_state(1)[0]) for n, c in zip(names, children)}


def lr_at_epoch(epoch: int, cfg: TrainConfig) -> float:
    """Flat through the first phase, then linear to zero.

    The linear ramp is anchored at the last flat epoch (where it still equals
    the full rate) and reaches exactly 0 at epoch == cfg.epochs, which is
    accepted here as the decay endpoint even though training stops before it.
    """
    if epoch < 0 or epoch > cfg.epochs:
        raise ValueError(f"epoch {epoch} outside schedule 0..{cfg.epochs}")
    if epoch < cfg.flat_epochs:
        # The ramp anchor (last flat epoch) equals cfg.lr analytically; return
        # the exact constant so the flat phase is flat to the last bit.
        return cfg.lr
    return cfg.lr * (cfg.epochs - epoch) / (cfg.decay_epochs + 1)

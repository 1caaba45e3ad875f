"""Exception hierarchy shared across the package."""


class WindcomfortError(Exception):
    """Base class for all errors raised by this package."""


class InvalidScene(WindcomfortError):
    """A scene violates its invariants (bad polygon, vertex out of extent)."""


class OutOfRange(WindcomfortError):
    """A velocity value lies outside the declared [0, v_max] range."""


class UnsupportedAngle(WindcomfortError):
    """Rotation angle is not on the 45-degree lattice."""


class CorruptContainer(WindcomfortError):
    """Dataset container failed to parse (bad magic, dims, truncation)."""


class Diverged(WindcomfortError):
    """Flow solve produced a non-finite value."""

    def __init__(self, step: int):
        super().__init__(f"solver diverged at step {step}")
        self.step = step


class ShapeError(WindcomfortError):
    """Tensor shape incompatible with the requested architecture."""


class ShapeMismatch(WindcomfortError):
    """Two tensors that must share a shape do not."""


class DegenerateWeight(WindcomfortError):
    """Spectral normalization hit an all-zero weight matrix."""


class NonFiniteLoss(WindcomfortError):
    """Training loss became NaN/Inf."""

    def __init__(self, step: int, name: str):
        super().__init__(f"non-finite {name} at step {step}")
        self.step = step
        self.name = name


class CorruptCheckpoint(WindcomfortError):
    """Checkpoint file failed to parse."""


class SpecMismatch(WindcomfortError):
    """Checkpoint weights do not fit the model spec in its header."""


class AllPixelsExcluded(WindcomfortError):
    """Relative error undefined: no target pixel reaches the epsilon floor."""


class UnnormalizedRose(WindcomfortError):
    """Wind rose frequencies do not sum to one."""


class CriteriaShapeMismatch(WindcomfortError):
    """Comfort criteria do not match the supplied exceedance stack."""


class EmptyBatch(WindcomfortError):
    """An aggregate was requested over zero items."""

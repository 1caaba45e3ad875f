"""Desk-scale flow oracle: D2Q9 solver and dataset generator."""

from windcomfort.oracle.backend import backend_name, kernel
from windcomfort.oracle.families import DEFAULT_RANGES, FamilySpec, generate, sample_scene
from windcomfort.oracle.solver import SolverConfig, solve

__all__ = [
    "DEFAULT_RANGES", "FamilySpec", "SolverConfig", "backend_name", "generate",
    "kernel", "sample_scene", "solve",
]

"""
Coined quantum walk on the Fibonacci chains.
"""

from src.walk.walk import (
    QuantumWalk,
    WalkResult,
    WalkState,
    build_walk_stage,
    run_two_photon_walk,
    run_walk,
    variance_slope,
    walk_step,
)

__all__ = [
    "QuantumWalk",
    "WalkResult",
    "WalkState",
    "build_walk_stage",
    "run_two_photon_walk",
    "run_walk",
    "variance_slope",
    "walk_step",
]

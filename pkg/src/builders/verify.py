"""
Comparison helpers shared by the builder self-tests.
"""

from typing import Optional, Sequence

from src.core.config import ORACLE_TOLERANCE
from src.models.report import VerificationCheck
from src.optics.circuit import DetectorProjector
from src.optics.state import Label, PureState, global_phase_distance


def label_content(state: PureState, path: Optional[str] = None, onto: str = "out") -> PureState:
    """Amplitudes of one path (or all paths) moved onto a common path name."""
    if path is not None:
        return state.path_content(path, onto)
    return state.moved({p: onto for p in state.paths()})


def ket(values: Sequence[Label], coefficients: Sequence[complex], path: str = "in") -> PureState:
    """sum_j coefficients[j] |values[j]> on one path (not normalized)."""
    amplitudes: dict[Label, complex] = {}
    for value, coef in zip(values, coefficients):
        amplitudes[value] = amplitudes.get(value, 0j) + complex(coef)
    return PureState.superposition(path, amplitudes)


def bra_check(
    projectors: dict[str, DetectorProjector],
    detector: str,
    target: PureState,
    weight: Optional[float] = None,
    tolerance: float = ORACLE_TOLERANCE,
) -> list[VerificationCheck]:
    """
    Compare a detector's effective bra with a target ket up to global phase
    and scale, and optionally its POVM weight.
    """
    projector = projectors[detector]
    checks = [
        VerificationCheck.measure(
            f"{detector} bra",
            global_phase_distance(projector.bra, target),
            tolerance,
            detail=repr(target),
        )
    ]
    if weight is not None:
        checks.append(
            VerificationCheck.measure(f"{detector} weight", abs(projector.weight - weight), tolerance)
        )
    return checks


def ket_check(name: str, achieved: PureState, target: PureState, tolerance: float = ORACLE_TOLERANCE) -> VerificationCheck:
    """Compare two label contents up to global phase and scale."""
    return VerificationCheck.measure(
        name,
        global_phase_distance(label_content(achieved), label_content(target)),
        tolerance,
    )

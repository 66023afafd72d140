"""
Polarization analogues of the OAM interferometers.

A polarizing beam splitter is a Sorter keyed by H and V; half-wave plates
rotate each arm onto a common diagonal so the final 50/50 splitter can
interfere them. The single interferometer tells +45 from -45 light; the
coupled pair adds a second copy with the opposite plates so both diagonals
have a bright detector.
"""

from typing import Any
import math

from src.builders.base import BaseBuilder, BuildResult
from src.core.config import EXACT_TOLERANCE
from src.core.errors import BuilderError
from src.measurement.statistics import probabilities
from src.models.report import VerificationCheck
from src.optics.circuit import Circuit
from src.optics.elements import BeamSplitter, HalfWavePlate, HWPOrientation, Sorter
from src.optics.state import Polarization, PureState

H, V = Polarization.H, Polarization.V

DIAGONALS = ("H", "V", "plus45", "minus45")


def diagonal_state(kind: str, path: str = "in") -> PureState:
    """
    Single-photon polarization state on one path.

    Args:
        kind: "H", "V", "plus45" = (H + V)/sqrt(2) or "minus45" = (V - H)/sqrt(2)
        path: Path the photon travels on

    Raises:
        BuilderError: For an unknown kind
    """
    r = 1.0 / math.sqrt(2.0)
    if kind == "H":
        return PureState.basis(path, H)
    if kind == "V":
        return PureState.basis(path, V)
    if kind == "plus45":
        return PureState.superposition(path, {H: r, V: r})
    if kind == "minus45":
        return PureState.superposition(path, {H: -r, V: r})
    raise BuilderError(f"unknown polarization state {kind!r}, expected one of {DIAGONALS}")


def _analyzer(in_port: str, suffix: str, h_plate: HWPOrientation, v_plate: HWPOrientation, c_port: str, d_port: str) -> list:
    h, v = f"h{suffix}", f"v{suffix}"
    return [
        Sorter(in_port, {H: h, V: v}, f"pbs{suffix}"),
        HalfWavePlate(h, h_plate),
        HalfWavePlate(v, v_plate),
        BeamSplitter(v, h, c_port, d_port),
    ]


def build_polarization_mz() -> Circuit:
    """
    Single interferometer: PBS, a plate on each arm, 50/50 recombination.

    +45 light lights only C, -45 only D, H or V splits evenly.
    """
    elements = _analyzer("in", "", HWPOrientation.MINUS45, HWPOrientation.PLUS45, "c", "d")
    return Circuit(["in"], elements, {"C": "c", "D": "d"}, name="polarization-mz")


def build_polarization_pair() -> Circuit:
    """
    Two interferometers fed from one 50/50 splitter, with opposite plates.

    +45 light fires C_plus or D_minus; -45 fires C_minus or D_plus;
    H or V gives 1/4 on every detector.
    """
    elements = [BeamSplitter("in", "aux", "up", "low")]
    elements += _analyzer("up", "_u", HWPOrientation.MINUS45, HWPOrientation.PLUS45, "cp", "dp")
    elements += _analyzer("low", "_l", HWPOrientation.PLUS45, HWPOrientation.MINUS45, "cm", "dm")
    detectors = {"C_plus": "cp", "D_plus": "dp", "C_minus": "cm", "D_minus": "dm"}
    return Circuit(["in"], elements, detectors, name="polarization-pair")


# Detectors expected to fire, per input, for the two apparatuses
_MZ_EXPECTED = {
    "H": {"C": 0.5, "D": 0.5},
    "V": {"C": 0.5, "D": 0.5},
    "plus45": {"C": 1.0, "D": 0.0},
    "minus45": {"C": 0.0, "D": 1.0},
}
_PAIR_EXPECTED = {
    "H": {"C_plus": 0.25, "D_plus": 0.25, "C_minus": 0.25, "D_minus": 0.25},
    "V": {"C_plus": 0.25, "D_plus": 0.25, "C_minus": 0.25, "D_minus": 0.25},
    "plus45": {"C_plus": 0.5, "D_plus": 0.0, "C_minus": 0.0, "D_minus": 0.5},
    "minus45": {"C_plus": 0.0, "D_plus": 0.5, "C_minus": 0.5, "D_minus": 0.0},
}


def _expected_checks(circuit: Circuit, expected: dict[str, dict[str, float]]) -> list[VerificationCheck]:
    checks = []
    for kind, table in expected.items():
        dist = probabilities(circuit, diagonal_state(kind))
        deviation = max(abs(dist.probability(name) - p) for name, p in table.items())
        checks.append(VerificationCheck.measure(f"{kind} input", deviation, EXACT_TOLERANCE))
    return checks


class PolarizationMZBuilder(BaseBuilder):
    """Single polarization interferometer."""

    @property
    def name(self) -> str:
        return "polarization-mz"

    @property
    def description(self) -> str:
        return "PBS + half-wave plates + 50/50 splitter separating the two diagonals"

    def build(self, **params: Any) -> BuildResult:
        return BuildResult(self.name, build_polarization_mz(), params)

    def checks(self, result: BuildResult) -> list[VerificationCheck]:
        return _expected_checks(result.circuit, _MZ_EXPECTED)


class PolarizationPairBuilder(BaseBuilder):
    """Two coupled polarization interferometers."""

    @property
    def name(self) -> str:
        return "polarization-pair"

    @property
    def description(self) -> str:
        return "Two polarization interferometers with opposite plates behind a 50/50 splitter"

    def build(self, **params: Any) -> BuildResult:
        return BuildResult(self.name, build_polarization_pair(), params)

    def checks(self, result: BuildResult) -> list[VerificationCheck]:
        return _expected_checks(result.circuit, _PAIR_EXPECTED)

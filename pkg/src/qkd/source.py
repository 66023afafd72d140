"""
Entangled pair source and the two receivers.

The source emits the post-filter state

    sum_n |F_{n-1}>_A |F_{n-2}>_B + |F_{n-2}>_A |F_{n-1}>_B

over n = m0+2 .. m0+N, uniformly weighted, so both photons carry window
values F_{m0} .. F_{m0+N-1} and the two are always adjacent Fibonacci numbers.

The L receiver sorts the window values onto detectors L_k. The D receiver is
a two-chain C/D tree widened by two indices on each side of the window, so
every window value reaches two C/D pairs.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math

from src.builders.cd_tree import ChainParity, build_cd_tree
from src.builders.mub4 import build_l_analyzer
from src.models.protocol import Basis, ProtocolConfig
from src.optics.circuit import Circuit, DetectorProjector, detector_projectors, source_basis
from src.optics.sequences import SequenceWindow, fibonacci_fraction
from src.optics.state import Mode, TwoPhotonState

SOURCE_PORT = "in"


def generate_pair(config: ProtocolConfig) -> TwoPhotonState:
    """
    Normalized two-photon state over the configured window.

    Raises:
        IndexOutOfRangeError: If a window index is missing from the sequence
    """
    window = SequenceWindow(config.seq)
    terms = list(range(config.m0 + 2, config.m0 + config.window + 1))
    amp = 1.0 / math.sqrt(2 * len(terms))
    amplitudes: dict[tuple[Mode, Mode], complex] = {}
    for n in terms:
        newer = Mode(SOURCE_PORT, window.value(n - 1))
        older = Mode(SOURCE_PORT, window.value(n - 2))
        amplitudes[(newer, older)] = amp
        amplitudes[(older, newer)] = amp
    return TwoPhotonState(amplitudes)


def filter_retention(config: ProtocolConfig) -> Fraction:
    """Share of the integers spanned by the window that the Fibonacci filter keeps."""
    window = SequenceWindow(config.seq)
    return fibonacci_fraction(window.value(config.m0), window.value(config.m0 + config.window - 1))


def d_analyzer_range(config: ProtocolConfig, window: SequenceWindow) -> tuple[int, int]:
    """Index range of the D receiver's tree, clipped to the generated sequence."""
    first = max(min(window.indices), config.m0 - 2)
    last = min(max(window.indices), config.m0 + config.window + 1)
    return first, last


@dataclass
class Receivers:
    """The L and D analyzers with their projectors over the window basis."""

    window: SequenceWindow
    circuits: dict[Basis, Circuit]
    projectors: dict[Basis, dict[str, DetectorProjector]] = field(default_factory=dict)

    def detectors(self, basis: Basis) -> list[str]:
        return sorted(self.circuits[basis].detectors)


def build_receivers(config: ProtocolConfig) -> Receivers:
    """
    Build both analyzers and their projectors.

    Raises:
        BuilderError: If the sequence is too short around the window
    """
    window = SequenceWindow(config.seq)
    indices = config.indices
    values = [window.value(n) for n in indices]

    l_circuit = build_l_analyzer(values, indices, in_port=SOURCE_PORT)
    first, last = d_analyzer_range(config, window)
    d_circuit = build_cd_tree(window, ChainParity.BOTH, first, last, in_port=SOURCE_PORT)

    circuits = {Basis.L: l_circuit, Basis.D: d_circuit}
    projectors = {
        basis: detector_projectors(circuit, source_basis(circuit, values)) for basis, circuit in circuits.items()
    }
    return Receivers(window=window, circuits=circuits, projectors=projectors)

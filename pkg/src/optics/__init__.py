"""
Photon state algebra, optical elements and the circuit engine.
"""

from src.optics.circuit import (
    Circuit,
    DetectorProjector,
    TransferMatrix,
    check_isometry,
    detector_projectors,
    simulate,
    transfer_matrix,
)
from src.optics.elements import (
    Attenuator,
    BeamSplitter,
    BSConvention,
    Element,
    HalfWavePlate,
    HWPOrientation,
    LabelUnitary,
    Merge,
    OamShift,
    PhaseShift,
    Sorter,
    half_wave_plate,
)
from src.optics.sequences import (
    SequenceKind,
    SequenceSpec,
    SequenceWindow,
    StateFamily,
    fibonacci_fraction,
    generate_sequence,
    make_named_state,
)
from src.optics.state import Mode, Polarization, PureState, TwoPhotonState, inner

__all__ = [
    "Attenuator",
    "BeamSplitter",
    "BSConvention",
    "Circuit",
    "DetectorProjector",
    "Element",
    "HalfWavePlate",
    "HWPOrientation",
    "LabelUnitary",
    "Merge",
    "Mode",
    "OamShift",
    "PhaseShift",
    "Polarization",
    "PureState",
    "SequenceKind",
    "SequenceSpec",
    "SequenceWindow",
    "Sorter",
    "StateFamily",
    "TransferMatrix",
    "TwoPhotonState",
    "check_isometry",
    "detector_projectors",
    "fibonacci_fraction",
    "generate_sequence",
    "half_wave_plate",
    "inner",
    "make_named_state",
    "simulate",
    "transfer_matrix",
]

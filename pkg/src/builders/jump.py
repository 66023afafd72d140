"""
Chain tree testing for c1|x_k> + c2|x_{k-stride}>.

Each spoke is shifted to label 0 and split 50/50. Arm a is attenuated in
amplitude by |c1|/c_max and phase shifted by -arg(c1); arm b the same with
c2. Arm a of spoke k meets arm b of spoke k - stride at the pair splitter
feeding C_k and D_k, so

    C_k ~ c1 x_k + c2 x_{k-stride}
    D_k ~ c1 x_k - c2 x_{k-stride}

Stride 2 pairs next-nearest neighbours. Unpaired arms end on EA_/EB_.
"""

from typing import Any, Optional, Sequence
import cmath

from src.builders.base import BaseBuilder, BuildResult, int_param, sequence_param
from src.builders.sgdt import parse_coefficients, parse_values
from src.builders.verify import bra_check, ket
from src.core.errors import BuilderError
from src.models.report import VerificationCheck
from src.optics.circuit import Circuit, detector_projectors, source_basis
from src.optics.elements import Attenuator, BeamSplitter, Element, OamShift, PhaseShift, Sorter
from src.optics.sequences import SequenceWindow

DEFAULT_COEFFICIENTS = (-1.0, 0.5)


def _weight(port: str, coefficient: complex, cmax: float) -> list[Element]:
    out: list[Element] = []
    t = abs(coefficient) / cmax
    if t < 1.0:
        out.append(Attenuator(port, t))
    phi = cmath.phase(coefficient)
    if phi != 0.0:
        out.append(PhaseShift(port, -phi))
    return out


def build_jump_tree(
    values: Sequence[int],
    coefficients: Sequence[complex] = DEFAULT_COEFFICIENTS,
    stride: int = 1,
    indices: Optional[Sequence[int]] = None,
) -> Circuit:
    """
    Build the jump tree over an ordered list of values.

    Args:
        values: Chain values, oldest first
        coefficients: (c1, c2) weighting the newer and older spoke
        stride: Index distance between paired spokes (1 or 2)
        indices: Names for the spokes in detector labels; defaults to 1..len

    Raises:
        BuilderError: On bad coefficients, stride, or too few values
    """
    values = [int(v) for v in values]
    indices = list(indices) if indices is not None else list(range(1, len(values) + 1))
    if len(coefficients) != 2:
        raise BuilderError(f"a jump tree takes two coefficients, got {len(coefficients)}")
    c1, c2 = (complex(c) for c in coefficients)
    if c1 == 0 or c2 == 0:
        raise BuilderError("jump coefficients must both be nonzero")
    cmax = max(abs(c1), abs(c2))
    if stride not in (1, 2):
        raise BuilderError(f"stride must be 1 or 2, got {stride}")
    if len(values) <= stride:
        raise BuilderError(f"stride {stride} needs more than {stride} values, got {len(values)}")
    if len(set(values)) != len(values) or len(indices) != len(values):
        raise BuilderError("jump tree values must be distinct, with one index each")

    elements: list[Element] = [Sorter("in", {v: f"s{k}" for k, v in zip(indices, values)}, "discard")]
    detectors: dict[str, str] = {}
    for pos, (k, v) in enumerate(zip(indices, values)):
        elements += [
            OamShift(f"s{k}", -v),
            BeamSplitter(f"s{k}", f"z{k}", f"a{k}", f"b{k}"),
        ]
        elements += _weight(f"a{k}", c1, cmax)
        elements += _weight(f"b{k}", c2, cmax)
        if pos >= stride:
            older = indices[pos - stride]
            elements.append(BeamSplitter(f"a{k}", f"b{older}", f"c{k}", f"d{k}"))
            detectors[f"C_{k}"] = f"c{k}"
            detectors[f"D_{k}"] = f"d{k}"
        else:
            detectors[f"EA_{k}"] = f"a{k}"
        if pos + stride >= len(values):
            detectors[f"EB_{k}"] = f"b{k}"
    return Circuit(["in"], elements, detectors, name=f"jump-{stride}")


class JumpTreeBuilder(BaseBuilder):
    """
    Params:
        values: "2,3,5,8" or a list; otherwise taken from `seq`
        coeffs: "c1,c2" (default -1,0.5)
        stride: 1 or 2
    """

    @property
    def name(self) -> str:
        return "jump"

    @property
    def description(self) -> str:
        return "Chain tree detecting c1|x_k> + c2|x_{k-stride}> at C_k"

    def build(self, **params: Any) -> BuildResult:
        coefficients = parse_coefficients(params.get("coeffs", DEFAULT_COEFFICIENTS))
        stride = int_param(params, "stride", 1)
        if params.get("values") is not None:
            values = list(parse_values(params["values"]))
            indices = list(range(1, len(values) + 1))
        else:
            window = SequenceWindow(sequence_param(params.get("seq")))
            values, indices = window.values, window.indices
        circuit = build_jump_tree(values, coefficients, stride, indices)
        data = {"values": values, "indices": indices, "coefficients": coefficients, "stride": stride}
        return BuildResult(self.name, circuit, params, data=data)

    def checks(self, result: BuildResult) -> list[VerificationCheck]:
        values, indices = result.data["values"], result.data["indices"]
        c1, c2 = result.data["coefficients"]
        stride = result.data["stride"]
        projectors = detector_projectors(result.circuit, source_basis(result.circuit, values))
        checks: list[VerificationCheck] = []
        for pos in range(stride, len(values)):
            k = indices[pos]
            pair = [values[pos], values[pos - stride]]
            checks += bra_check(projectors, f"C_{k}", ket(pair, [c1, c2]))
            checks += bra_check(projectors, f"D_{k}", ket(pair, [c1, -c2]))
        return checks

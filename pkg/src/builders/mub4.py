"""
Four-dimensional mutually unbiased analyzers.

The L analyzer is a sorter with one detector per value. The M analyzer sorts
the four values onto lines m1..m4, shifts them to label 0 and runs a
two-layer 50/50 network, so detector M_j measures

    M_1 ~ (+ + + +)   M_2 ~ (+ + - -)   M_3 ~ (+ - - +)   M_4 ~ (+ - + -)

over (x_1, x_2, x_3, x_4), each with unit weight. Every L bra overlaps every
M bra with squared magnitude 1/4.
"""

from typing import Any, Optional, Sequence
import itertools

from src.builders.base import BaseBuilder, BuildResult
from src.builders.sgdt import parse_values
from src.builders.verify import bra_check, ket
from src.core.config import EXACT_TOLERANCE
from src.core.errors import BuilderError
from src.models.report import VerificationCheck
from src.optics.circuit import Circuit, DetectorProjector, detector_projectors, source_basis
from src.optics.elements import BeamSplitter, Element, OamShift, Sorter
from src.optics.state import inner

HADAMARD_SIGNS = {
    "M_1": (1, 1, 1, 1),
    "M_2": (1, 1, -1, -1),
    "M_3": (1, -1, -1, 1),
    "M_4": (1, -1, 1, -1),
}

DEFAULT_VALUES = (2, 3, 5, 8)


def _check_values(values: Sequence[int], size: Optional[int] = None) -> list[int]:
    values = [int(v) for v in values]
    if size is not None and len(values) != size:
        raise BuilderError(f"expected {size} values, got {len(values)}")
    if len(set(values)) != len(values):
        raise BuilderError(f"analyzer values must be distinct, got {values}")
    if not values:
        raise BuilderError("an analyzer needs at least one value")
    return values


def l_analyzer_elements(
    values: Sequence[int],
    indices: Sequence[int],
    in_port: str,
    prefix: str = "",
) -> tuple[list[Element], dict[str, str]]:
    """Sorter with one detector L_<index> per value."""
    table = {v: f"{prefix}l{k}" for v, k in zip(values, indices)}
    detectors = {f"L_{k}": f"{prefix}l{k}" for k in indices}
    return [Sorter(in_port, table, f"{prefix}discard")], detectors


def m_analyzer_elements(values: Sequence[int], in_port: str, prefix: str = "") -> tuple[list[Element], dict[str, str]]:
    """Sorter plus two layers of 50/50 splitters realizing the Hadamard rows."""
    p = prefix
    lines = [f"{p}m{k}" for k in range(1, 5)]
    elements: list[Element] = [Sorter(in_port, dict(zip(values, lines)), f"{p}discard")]
    elements += [OamShift(line, -v) for line, v in zip(lines, values)]
    elements += [
        BeamSplitter(lines[0], lines[1], f"{p}s12", f"{p}d12"),
        BeamSplitter(lines[2], lines[3], f"{p}s34", f"{p}d34"),
        BeamSplitter(f"{p}s12", f"{p}s34", f"{p}o1", f"{p}o2"),
        BeamSplitter(f"{p}d12", f"{p}d34", f"{p}o4", f"{p}o3"),
    ]
    detectors = {f"M_{k}": f"{p}o{k}" for k in range(1, 5)}
    return elements, detectors


def build_l_analyzer(values: Sequence[int], indices: Optional[Sequence[int]] = None, in_port: str = "in") -> Circuit:
    """
    Eigenstate analyzer: sorter plus detectors L_<index>.

    Raises:
        BuilderError: On duplicate values
    """
    values = _check_values(values)
    indices = list(indices) if indices is not None else list(range(1, len(values) + 1))
    if len(indices) != len(values):
        raise BuilderError(f"{len(indices)} indices for {len(values)} values")
    elements, detectors = l_analyzer_elements(values, indices, in_port)
    return Circuit([in_port], elements, detectors, name="l-analyzer")


def build_m_analyzer(values: Sequence[int], in_port: str = "in") -> Circuit:
    """
    Hadamard-basis analyzer over four values, detectors M_1..M_4.

    Raises:
        BuilderError: Unless given four distinct values
    """
    values = _check_values(values, 4)
    elements, detectors = m_analyzer_elements(values, in_port)
    return Circuit([in_port], elements, detectors, name="m-analyzer")


def build_mub4(values: Sequence[int]) -> tuple[Circuit, Circuit]:
    """
    The two mutually unbiased analyzers over four values.

    Returns:
        (L analyzer, M analyzer)

    Raises:
        BuilderError: Unless given four distinct values
    """
    values = _check_values(values, 4)
    return build_l_analyzer(values), build_m_analyzer(values)


def build_mub4_switch(values: Sequence[int]) -> Circuit:
    """
    Passive basis choice: a 50/50 splitter sends the photon to the L or the
    M analyzer, each detector seeing half its usual weight.
    """
    values = _check_values(values, 4)
    elements: list[Element] = [BeamSplitter("in", "zsw", "la", "ma")]
    l_elements, l_detectors = l_analyzer_elements(values, range(1, 5), "la", prefix="l_")
    m_elements, m_detectors = m_analyzer_elements(values, "ma", prefix="m_")
    return Circuit(["in"], elements + l_elements + m_elements, {**l_detectors, **m_detectors}, name="mub4-switch")


def cross_overlaps(l_projectors: dict[str, DetectorProjector], m_projectors: dict[str, DetectorProjector]) -> dict[tuple[str, str], float]:
    """Squared overlaps between normalized L and M bras."""
    out: dict[tuple[str, str], float] = {}
    for (l_name, lp), (m_name, mp) in itertools.product(sorted(l_projectors.items()), sorted(m_projectors.items())):
        out[(l_name, m_name)] = abs(inner(lp.bra.normalized(), mp.bra.normalized())) ** 2
    return out


class MUB4Builder(BaseBuilder):
    """
    Params:
        values: Four distinct labels, "2,3,5,8" or a list
    """

    @property
    def name(self) -> str:
        return "mub4"

    @property
    def description(self) -> str:
        return "L analyzer (sorter) and M analyzer (Hadamard network) over four labels"

    def build(self, **params: Any) -> BuildResult:
        values = list(parse_values(params.get("values", DEFAULT_VALUES)))
        l_analyzer, m_analyzer = build_mub4(values)
        return BuildResult(self.name, m_analyzer, params, extra={"l": l_analyzer}, data={"values": values})

    def checks(self, result: BuildResult) -> list[VerificationCheck]:
        values = result.data["values"]
        m_projectors = detector_projectors(result.circuit, source_basis(result.circuit, values))
        l_circuit = result.extra["l"]
        l_projectors = detector_projectors(l_circuit, source_basis(l_circuit, values))

        checks: list[VerificationCheck] = []
        for name, signs in HADAMARD_SIGNS.items():
            checks += bra_check(m_projectors, name, ket(values, signs), weight=1.0, tolerance=EXACT_TOLERANCE)
        for k, v in enumerate(values, start=1):
            checks += bra_check(l_projectors, f"L_{k}", ket([v], [1.0]), weight=1.0, tolerance=EXACT_TOLERANCE)

        # each basis orthonormal
        for label, projectors in (("M", m_projectors), ("L", l_projectors)):
            names = sorted(projectors)
            deviation = max(
                abs(inner(projectors[a].bra, projectors[b].bra) - (1.0 if a == b else 0.0))
                for a in names
                for b in names
            )
            checks.append(VerificationCheck.measure(f"{label} basis orthonormal", deviation, EXACT_TOLERANCE))

        overlaps = cross_overlaps(l_projectors, m_projectors)
        deviation = max(abs(o - 0.25) for o in overlaps.values())
        checks.append(
            VerificationCheck.measure("cross-basis overlaps 0.25", deviation, EXACT_TOLERANCE, detail=f"{len(overlaps)} pairs")
        )
        return checks


class LAnalyzerBuilder(BaseBuilder):
    """
    Params:
        values: Labels to sort, "2,3,5" or a list
        indices: Optional detector indices
    """

    @property
    def name(self) -> str:
        return "l-analyzer"

    @property
    def description(self) -> str:
        return "Sorter with one detector L_k per label"

    def build(self, **params: Any) -> BuildResult:
        values = list(parse_values(params.get("values", DEFAULT_VALUES)))
        indices = list(parse_values(params["indices"])) if params.get("indices") is not None else None
        circuit = build_l_analyzer(values, indices)
        return BuildResult(self.name, circuit, params, data={"values": values})

    def checks(self, result: BuildResult) -> list[VerificationCheck]:
        values = result.data["values"]
        projectors = detector_projectors(result.circuit, source_basis(result.circuit, values))
        checks: list[VerificationCheck] = []
        for name, projector in sorted(projectors.items()):
            checks.append(VerificationCheck.measure(f"{name} weight", abs(projector.weight - 1.0), EXACT_TOLERANCE))
        return checks


class MUB4SwitchBuilder(BaseBuilder):
    """
    Params:
        values: Four distinct labels
    """

    @property
    def name(self) -> str:
        return "mub4-switch"

    @property
    def description(self) -> str:
        return "50/50 splitter choosing between the L and M analyzers"

    def build(self, **params: Any) -> BuildResult:
        values = list(parse_values(params.get("values", DEFAULT_VALUES)))
        return BuildResult(self.name, build_mub4_switch(values), params, data={"values": values})

    def checks(self, result: BuildResult) -> list[VerificationCheck]:
        values = result.data["values"]
        projectors = detector_projectors(result.circuit, source_basis(result.circuit, values))
        checks: list[VerificationCheck] = []
        for name, signs in HADAMARD_SIGNS.items():
            checks += bra_check(projectors, name, ket(values, signs), weight=0.5, tolerance=EXACT_TOLERANCE)
        for k in range(1, 5):
            checks.append(
                VerificationCheck.measure(f"L_{k} weight", abs(projectors[f"L_{k}"].weight - 0.5), EXACT_TOLERANCE)
            )
        return checks

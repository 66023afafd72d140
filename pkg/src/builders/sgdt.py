"""
Superposition generation and detection tree.

Detection: a sorter sends each target value x_j down its own line, the line
is shifted to label 0, attenuated in amplitude by |a_j|/a_max and phase
shifted by -arg(a_j). A left-fold cascade then merges the lines; stage k
combines the accumulated line with line k at amplitude ratio sqrt((k-1)/k),
so after the last stage the C port carries (1/sqrt(n)) sum_j of the lines
and the C detector measures sum_j a_j |x_j> up to scale.

Synthesis runs the same tree the other way round: no shifters, phases
+arg(a_j), no detectors. A uniform superposition of the x_j at the sorter
input leaves a state proportional to sum_j a_j |x_j> at the C port.
"""

from dataclasses import dataclass
from typing import Any, Optional, Sequence
import cmath
import math

import numpy as np

from src.builders.base import BaseBuilder, BuildResult, int_param, sequence_param
from src.builders.verify import bra_check, ket, ket_check, label_content
from src.core.config import ORACLE_TOLERANCE
from src.core.errors import BuilderError
from src.models.report import VerificationCheck
from src.optics.circuit import Circuit, detector_projectors, simulate, source_basis
from src.optics.elements import Attenuator, BeamSplitter, Element, OamShift, PhaseShift, Sorter
from src.optics.sequences import SequenceSpec, SequenceWindow
from src.optics.state import PureState, global_phase_distance

OUTPUT_PORT = "C"


@dataclass(frozen=True)
class SuperpositionTarget:
    """
    The state a_1|x_1> + ... + a_n|x_n> a tree detects or prepares.

    `anchor` records the sequence index m when the values are x_{m-1}..x_{m-n}.
    """

    coefficients: tuple[complex, ...]
    values: tuple[int, ...]
    anchor: Optional[int] = None

    def __post_init__(self) -> None:
        coefficients = tuple(complex(a) for a in self.coefficients)
        values = tuple(int(v) for v in self.values)
        object.__setattr__(self, "coefficients", coefficients)
        object.__setattr__(self, "values", values)
        if not coefficients:
            raise BuilderError("a superposition target needs at least one coefficient")
        if len(coefficients) != len(values):
            raise BuilderError(f"{len(coefficients)} coefficients for {len(values)} values")
        if not any(abs(a) > 0.0 for a in coefficients):
            raise BuilderError("all target coefficients are zero")
        if len(set(values)) != len(values):
            raise BuilderError(f"target values must be distinct, got {values}")

    @classmethod
    def from_sequence(cls, coefficients: Sequence[complex], seq: SequenceSpec | SequenceWindow, anchor: int) -> "SuperpositionTarget":
        """Target over x_{m-1}, ..., x_{m-n} of a sequence."""
        window = seq if isinstance(seq, SequenceWindow) else SequenceWindow(seq)
        values = tuple(window.value(anchor - j) for j in range(1, len(coefficients) + 1))
        return cls(tuple(coefficients), values, anchor)

    @property
    def amax(self) -> float:
        return max(abs(a) for a in self.coefficients)

    def lines(self) -> list[tuple[int, int, complex]]:
        """(line number, value, coefficient) for every nonzero coefficient."""
        return [
            (j, v, a)
            for j, (v, a) in enumerate(zip(self.values, self.coefficients), start=1)
            if abs(a) > 0.0
        ]

    def state(self, path: str = "in") -> PureState:
        return ket(self.values, self.coefficients, path)


def _tree(target: SuperpositionTarget, synthesis: bool) -> tuple[list[Element], dict[str, str], dict[str, str]]:
    lines = target.lines()
    amax = target.amax
    elements: list[Element] = [Sorter("in", {v: f"line{j}" for j, v, _ in lines}, "discard")]
    for j, v, a in lines:
        port = f"line{j}"
        if not synthesis:
            elements.append(OamShift(port, -v))
        t = abs(a) / amax
        if t < 1.0:
            elements.append(Attenuator(port, t))
        phi = cmath.phase(a)
        if phi != 0.0:
            elements.append(PhaseShift(port, phi if synthesis else -phi))

    detectors: dict[str, str] = {}
    ports: dict[str, str] = {}
    if len(lines) == 1:
        ports["C"] = f"line{lines[0][0]}"
    else:
        acc = f"line{lines[0][0]}"
        for k, (j, _, _) in enumerate(lines[1:], start=2):
            out = OUTPUT_PORT if k == len(lines) else f"acc{k}"
            spare = f"dd{k}"
            elements.append(BeamSplitter(acc, f"line{j}", out, spare, math.sqrt((k - 1) / k)))
            ports[f"D_{k}"] = spare
            acc = out
        ports["C"] = OUTPUT_PORT
    if not synthesis:
        detectors = dict(ports)
    return elements, detectors, ports


def build_sgdt(target: SuperpositionTarget) -> Circuit:
    """
    Detection tree whose C detector measures the target superposition.

    Spare cascade outputs end on detectors D_2..D_n.
    """
    elements, detectors, _ = _tree(target, synthesis=False)
    return Circuit(["in"], elements, detectors, name="sgdt")


def build_synthesizer(target: SuperpositionTarget) -> Circuit:
    """The detection tree run as a state generator; the output leaves at port C."""
    elements, _, _ = _tree(target, synthesis=True)
    return Circuit(["in"], elements, name="synthesizer")


def synthesizer_ports(target: SuperpositionTarget) -> dict[str, str]:
    """Former detector name -> port of the synthesizer."""
    return _tree(target, synthesis=True)[2]


def uniform_input(target: SuperpositionTarget, path: str = "in") -> PureState:
    """(1/sqrt(n)) sum_j |x_j> over the target values."""
    return ket(target.values, [1.0] * len(target.values), path).normalized()


def synthesize(target: SuperpositionTarget, port: Optional[str] = None) -> PureState:
    """Label content the synthesizer leaves on its output port (or `port`) for a uniform input."""
    out = simulate(build_synthesizer(target), uniform_input(target))
    return out.path_content(port or synthesizer_ports(target)["C"], "in")


def random_target(rng: np.random.Generator, max_terms: int = 5, values: Optional[Sequence[int]] = None) -> SuperpositionTarget:
    """Random complex target with 1..max_terms terms, for sweeps."""
    n = int(rng.integers(1, max_terms + 1))
    coefficients = rng.normal(size=n) + 1j * rng.normal(size=n)
    chosen = list(values[:n]) if values is not None else sorted(rng.choice(np.arange(1, 200), size=n, replace=False).tolist())
    return SuperpositionTarget(tuple(coefficients), tuple(chosen))


def parse_coefficients(value: Any) -> tuple[complex, ...]:
    """Accept "1,-0.5,1j" or a list of numbers."""
    if isinstance(value, str):
        try:
            return tuple(complex(part.strip().replace(" ", "")) for part in value.split(",") if part.strip())
        except ValueError as e:
            raise BuilderError(f"bad coefficient list {value!r}") from e
    try:
        return tuple(complex(a) for a in value)
    except (TypeError, ValueError) as e:
        raise BuilderError(f"bad coefficient list {value!r}") from e


def parse_values(value: Any) -> tuple[int, ...]:
    """Accept "2,3,5" or a list of integers."""
    if isinstance(value, str):
        try:
            return tuple(int(part) for part in value.split(",") if part.strip())
        except ValueError as e:
            raise BuilderError(f"bad value list {value!r}") from e
    try:
        return tuple(int(v) for v in value)
    except (TypeError, ValueError) as e:
        raise BuilderError(f"bad value list {value!r}") from e


def target_from_params(params: dict[str, Any]) -> SuperpositionTarget:
    """
    Build a target from builder params: `coeffs`, plus either `values` or an
    `anchor` index into `seq`.

    Raises:
        BuilderError: On missing or inconsistent parameters
    """
    if "coeffs" not in params:
        raise BuilderError("missing 'coeffs'")
    coefficients = parse_coefficients(params["coeffs"])
    if params.get("values") is not None:
        return SuperpositionTarget(coefficients, parse_values(params["values"]), int_param(params, "anchor"))
    window = SequenceWindow(sequence_param(params.get("seq")))
    anchor = int_param(params, "anchor", window.indices[0] + len(coefficients))
    return SuperpositionTarget.from_sequence(coefficients, window, anchor)


class SGDTBuilder(BaseBuilder):
    """Detection tree for an arbitrary complex superposition."""

    @property
    def name(self) -> str:
        return "sgdt"

    @property
    def description(self) -> str:
        return "Sorter + attenuated, phase-shifted lines merged by a weighted cascade; detector C"

    def build(self, **params: Any) -> BuildResult:
        target = target_from_params(params)
        circuit = build_sgdt(target)
        self.logger.info(f"Built sgdt over values {target.values} ({len(circuit)} elements)")
        return BuildResult(self.name, circuit, params, data={"target": target})

    def checks(self, result: BuildResult) -> list[VerificationCheck]:
        target: SuperpositionTarget = result.data["target"]
        basis = source_basis(result.circuit, target.values)
        projectors = detector_projectors(result.circuit, basis)
        return bra_check(projectors, "C", target.state())


class SynthesizerBuilder(BaseBuilder):
    """Detection tree run in reverse as a state generator."""

    @property
    def name(self) -> str:
        return "synthesizer"

    @property
    def description(self) -> str:
        return "sgdt without shifters or detectors; uniform input yields the target at port C"

    def build(self, **params: Any) -> BuildResult:
        target = target_from_params(params)
        return BuildResult(self.name, build_synthesizer(target), params, data={"target": target})

    def checks(self, result: BuildResult) -> list[VerificationCheck]:
        target: SuperpositionTarget = result.data["target"]
        output_port = synthesizer_ports(target)["C"]
        achieved = simulate(result.circuit, uniform_input(target)).path_content(output_port, "in")
        checks = [ket_check("output ket", achieved, target.state())]

        # detection and synthesis are the same tree in opposite senses
        sgdt = build_sgdt(target)
        bra = detector_projectors(sgdt, source_basis(sgdt, target.values))["C"].bra
        checks.append(
            VerificationCheck.measure(
                "sgdt duality",
                global_phase_distance(label_content(bra), label_content(achieved)),
                ORACLE_TOLERANCE,
            )
        )
        return checks

"""
Recursive state generator.

A cell takes |x_n> on in1 and |x_{n+1}> on in2. Each input is split 50/50:
one half leaves as output 1 or 2, the other halves meet at a third splitter
whose sum port is output 3, carrying (|x_n> + |x_{n+1}>)/sqrt(2). The
splitter on in2 is the bottom line's 1/sqrt(2) amplitude attenuation; the
light it takes off leaves as output 2. With orthogonal equal-norm
inputs the three outputs have equal norm, each half the input port intensity.

The full generator seeds the chain from a sorter and nests p cells: cell k
passes its output 2 and output 3 on as cell k+1's inputs. Inside each cell
the larger input is attenuated to the norm of the smaller one and the taps
carry the recurrence coefficients, so output k+2 is proportional to
c1 x_{k+1} + c2 x_k for normalized x. Final attenuators equalize all p + 2
outputs.
"""

from typing import Any
import cmath
import math

from src.builders.base import BaseBuilder, BuildResult, bool_param, int_param, sequence_param
from src.builders.sgdt import parse_values
from src.builders.verify import label_content
from src.core.config import EXACT_TOLERANCE, ORACLE_TOLERANCE
from src.core.errors import BuilderError
from src.models.report import VerificationCheck
from src.optics.circuit import Circuit, simulate
from src.optics.elements import Attenuator, BeamSplitter, Element, PhaseShift, Sorter
from src.optics.sequences import SequenceSpec
from src.optics.state import PureState, fidelity

CELL_OUTPUTS = ("out1", "out2", "out3")


def build_rsg_cell(in1: str = "in1", in2: str = "in2", outputs: tuple[str, str, str] = CELL_OUTPUTS, tag: str = "") -> Circuit:
    """
    Single unit cell: two inputs, three outputs, detectors X_1..X_3.

    Output 3 carries the sum of the two inputs; the difference port is
    left open as waste.
    """
    elements = cell_elements(in1, in2, outputs, tag)
    detectors = {f"X_{k}": port for k, port in enumerate(outputs, start=1)}
    return Circuit([in1, in2], elements, detectors, name="rsg-cell")


def cell_elements(
    in1: str,
    in2: str,
    outputs: tuple[str, str, str],
    tag: str = "",
    tap1: complex = 1.0,
    tap2: complex = 1.0,
) -> list[Element]:
    """Cell splitters with optional tap weights on the two interfering halves."""
    out1, out2, out3 = outputs
    t1, t2 = f"t1{tag}", f"t2{tag}"
    elements: list[Element] = [
        BeamSplitter(in1, f"z1{tag}", out1, t1),
        BeamSplitter(in2, f"z2{tag}", out2, t2),
    ]
    cmax = max(abs(tap1), abs(tap2))
    for port, tap in ((t1, tap1), (t2, tap2)):
        t = abs(tap) / cmax
        if t < 1.0:
            elements.append(Attenuator(port, t))
        phi = cmath.phase(tap)
        if phi != 0.0:
            elements.append(PhaseShift(port, phi))
    elements.append(BeamSplitter(t1, t2, out3, f"waste{tag}"))
    return elements


def _norms(elements: list[Element], ports: list[str], seed_state: PureState) -> dict[str, float]:
    partial = Circuit(["in"], elements)
    out = simulate(partial, seed_state)
    return {port: out.path_norm2(port) for port in ports}


def seed_state(seeds: tuple[int, int]) -> PureState:
    """Equal superposition of the two seed labels at the generator input."""
    r = 1.0 / math.sqrt(2.0)
    return PureState.superposition("in", {seeds[0]: r, seeds[1]: r})


def build_rsg(p: int, recurrence: SequenceSpec | None = None, equalize: bool = True) -> Circuit:
    """
    Build p nested cells seeded from a two-term recurrence.

    Args:
        p: Number of cells (outputs x1 .. x{p+2})
        recurrence: Two-term recurrence supplying seeds and coefficients
        equalize: Attenuate all outputs to a common intensity

    Raises:
        BuilderError: If p < 1, the recurrence is not two-term or seeds repeat
    """
    if p < 1:
        raise BuilderError(f"a generator needs at least one cell, got {p}")
    spec = recurrence or SequenceSpec()
    if spec.order != 2:
        raise BuilderError(f"the generator needs a two-term recurrence, got order {spec.order}")
    seeds = (int(spec.initial[0]), int(spec.initial[1]))
    if seeds[0] == seeds[1]:
        raise BuilderError(f"seed labels must differ, got {seeds}")
    c1, c2 = (complex(c) for c in spec.coefficients)
    if c1 == 0 or c2 == 0:
        raise BuilderError("recurrence coefficients must be nonzero")

    state = seed_state(seeds)
    elements: list[Element] = [Sorter("in", {seeds[0]: "a1", seeds[1]: "b1"}, "discard")]
    for k in range(1, p + 1):
        a, b = f"a{k}", f"b{k}"
        norms = _norms(elements, [a, b], state)
        small = min(norms.values())
        for port, n2 in norms.items():
            if n2 > small * (1.0 + EXACT_TOLERANCE):
                elements.append(Attenuator(port, math.sqrt(small / n2)))

        last = k == p
        outputs = (
            f"x{k}",
            f"x{p + 1}" if last else f"a{k + 1}",
            f"x{p + 2}" if last else f"b{k + 1}",
        )
        # a carries the older term, b the newer
        elements += cell_elements(a, b, outputs, tag=f"_{k}", tap1=c2, tap2=c1)

    ports = [f"x{k}" for k in range(1, p + 3)]
    if equalize:
        norms = _norms(elements, ports, state)
        small = min(norms.values())
        for port in ports:
            if norms[port] > small * (1.0 + EXACT_TOLERANCE):
                elements.append(Attenuator(port, math.sqrt(small / norms[port])))

    detectors = {f"X_{k}": f"x{k}" for k in range(1, p + 3)}
    return Circuit(["in"], elements, detectors, name=f"rsg-{p}")


def output_states(circuit: Circuit, state: PureState, count: int) -> list[PureState]:
    """Label content on x1 .. x{count}."""
    out = simulate(circuit, state)
    return [label_content(out, f"x{k}") for k in range(1, count + 1)]


def recurrence_fidelities(outputs: list[PureState], c1: complex = 1.0, c2: complex = 1.0) -> list[float]:
    """|<x_k | normalize(c1 x_{k-1} + c2 x_{k-2})>| for k >= 3 (1-based)."""
    out: list[float] = []
    for k in range(2, len(outputs)):
        target = outputs[k - 1].normalized() * c1 + outputs[k - 2].normalized() * c2
        out.append(fidelity(outputs[k], target))
    return out


class RSGCellBuilder(BaseBuilder):
    """
    Params:
        values: Two labels for the self-test input (default 1,2)
    """

    @property
    def name(self) -> str:
        return "rsg-cell"

    @property
    def description(self) -> str:
        return "Unit cell: two inputs, three equal-intensity outputs, third is the sum"

    def build(self, **params: Any) -> BuildResult:
        values = parse_values(params.get("values", (1, 2)))
        if len(values) != 2 or values[0] == values[1]:
            raise BuilderError(f"rsg-cell self-test needs two distinct labels, got {values}")
        return BuildResult(self.name, build_rsg_cell(), params, data={"values": values})

    def checks(self, result: BuildResult) -> list[VerificationCheck]:
        xn, xn1 = result.data["values"]
        r = 1.0 / math.sqrt(2.0)
        state = PureState.basis("in1", xn, r) + PureState.basis("in2", xn1, r)
        out = simulate(result.circuit, state)
        intensities = [out.path_norm2(port) for port in CELL_OUTPUTS]
        checks = [
            VerificationCheck.measure(
                "equal output intensities", max(intensities) - min(intensities), ORACLE_TOLERANCE
            )
        ]
        target = PureState.superposition("out", {xn: r, xn1: r})
        checks.append(
            VerificationCheck.measure(
                "output 3 is the normalized sum",
                1.0 - fidelity(label_content(out, "out3"), target),
                ORACLE_TOLERANCE,
            )
        )
        one_sided = simulate(result.circuit, PureState.basis("in1", xn))
        checks.append(VerificationCheck.measure("port 1 only leaves port 2 dark", one_sided.path_norm2("out2"), ORACLE_TOLERANCE))
        # bottom line: 1/sqrt(2) from the in2 splitter, 1/sqrt(2) from the sum splitter
        bottom = simulate(result.circuit, PureState.basis("in2", xn1))
        checks.append(
            VerificationCheck.measure(
                "bottom line attenuated by 1/sqrt(2) into the sum",
                abs(bottom.path_norm2("out3") - 0.25),
                ORACLE_TOLERANCE,
            )
        )
        return checks


class RSGBuilder(BaseBuilder):
    """
    Params:
        cells: Number of nested cells p (default 3)
        seq: Two-term recurrence spec (default Fibonacci)
        equalize: Equalize output intensities (default true)
    """

    @property
    def name(self) -> str:
        return "rsg"

    @property
    def description(self) -> str:
        return "Nested cells producing p + 2 equal-intensity states obeying the recurrence"

    def build(self, **params: Any) -> BuildResult:
        p = int_param(params, "cells", int_param(params, "p", 3))
        spec = sequence_param(params.get("seq"))
        equalize = bool_param(params, "equalize", True)
        circuit = build_rsg(p, spec, equalize)
        self.logger.info(f"Built rsg with {p} cells ({len(circuit)} elements)")
        return BuildResult(self.name, circuit, params, data={"p": p, "spec": spec, "equalize": equalize})

    def checks(self, result: BuildResult) -> list[VerificationCheck]:
        p, spec = result.data["p"], result.data["spec"]
        c1, c2 = (complex(c) for c in spec.coefficients)
        seeds = (int(spec.initial[0]), int(spec.initial[1]))
        outputs = output_states(result.circuit, seed_state(seeds), p + 2)

        checks: list[VerificationCheck] = []
        if result.data["equalize"]:
            norms = [o.norm2() for o in outputs]
            checks.append(VerificationCheck.measure("equal output intensities", max(norms) - min(norms), ORACLE_TOLERANCE))
        for k, f in enumerate(recurrence_fidelities(outputs, c1, c2), start=3):
            checks.append(
                VerificationCheck.measure(f"x{k} recurrence fidelity", 1.0 - f, ORACLE_TOLERANCE, detail=f"{f:.15f}")
            )
        return checks

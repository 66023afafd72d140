"""
Detection tree for order-r recurrences (Tribonacci and beyond).

Every spoke is shifted to label 0 right after the sorter and split r ways,
one arm per group it belongs to. Group n combines spokes n, n-1, ..., n-r+1:
each arm is split 50/50 into a C copy and a D copy, the D copies of the
older spokes get a pi phase, and two equal cascades merge the copies into
c{n} and d{n}. The resulting rows are

    C_n ~ x_n + x_{n-1} + ... + x_{n-r+1}
    D_n ~ x_n - x_{n-1} - ... - x_{n-r+1}

with equal weights 1/(2r). Cascade spares end on XC_/XD_ detectors and
arms that belong to groups outside the window end on XA_ detectors.
"""

from typing import Any
import math

from src.builders.base import BaseBuilder, BuildResult, int_param, sequence_param
from src.builders.verify import bra_check, ket
from src.core.config import ORACLE_TOLERANCE
from src.core.errors import BuilderError
from src.measurement.statistics import probabilities
from src.models.report import VerificationCheck
from src.optics.circuit import Circuit, detector_projectors, source_basis
from src.optics.elements import BeamSplitter, Element, OamShift, PhaseShift, Sorter
from src.optics.sequences import SequenceKind, SequenceSpec, SequenceWindow


def tree_groups(window: SequenceWindow, order: int) -> list[int]:
    """Indices n whose group n, n-1, ..., n-order+1 lies inside the window."""
    return [n for n in window.indices if all(window.has(n - j) for j in range(order))]


def _cascade(inputs: list[str], out: str, spare_prefix: str) -> tuple[list[Element], list[str]]:
    """Equal-weight merge of the inputs into `out`; returns elements and spare ports."""
    elements: list[Element] = []
    spares: list[str] = []
    acc = inputs[0]
    for k, port in enumerate(inputs[1:], start=2):
        target = out if k == len(inputs) else f"{spare_prefix}acc{k}"
        spare = f"{spare_prefix}x{k}"
        elements.append(BeamSplitter(acc, port, target, spare, math.sqrt((k - 1) / k)))
        spares.append(spare)
        acc = target
    return elements, spares


def build_nbonacci_tree(seq: SequenceSpec | SequenceWindow, order: int) -> Circuit:
    """
    Build the order-r detection tree over a sequence window.

    Raises:
        BuilderError: If order < 2 or the window holds fewer than order + 1 values
    """
    if order < 2:
        raise BuilderError(f"tree order must be at least 2, got {order}")
    window = seq if isinstance(seq, SequenceWindow) else SequenceWindow(seq)
    if len(window) < order + 1:
        raise BuilderError(f"an order-{order} tree needs at least {order + 1} values, got {len(window)}")
    groups = set(tree_groups(window, order))
    indices = window.indices

    elements: list[Element] = [Sorter("in", {window.value(i): f"s{i}" for i in indices}, "discard")]
    detectors: dict[str, str] = {}
    c_inputs: dict[int, list[str]] = {n: [] for n in groups}
    d_inputs: dict[int, list[str]] = {n: [] for n in groups}

    for i in indices:
        elements.append(OamShift(f"s{i}", -window.value(i)))
        members = [i + j for j in range(order)]
        arms = [f"a{i}g{g}" for g in members]

        current = f"s{i}"
        for k in range(order - 1):
            nxt = arms[k + 1] if k == order - 2 else f"r{i}_{k + 1}"
            elements.append(
                BeamSplitter(current, f"za{i}_{k}", arms[k], nxt, math.sqrt(1.0 / (order - k)))
            )
            current = nxt

        for j, (g, arm) in enumerate(zip(members, arms)):
            if g not in groups:
                detectors[f"XA_{i}_{g}"] = arm
                continue
            c_copy, d_copy = f"ac{i}g{g}", f"ad{i}g{g}"
            elements.append(BeamSplitter(arm, f"zc{i}g{g}", c_copy, d_copy))
            if j >= 1:
                elements.append(PhaseShift(d_copy, math.pi))
            c_inputs[g].append(c_copy)
            d_inputs[g].append(d_copy)

    for n in sorted(groups):
        # newest spoke first; its arm is the only one with j == 0
        c_order = sorted(c_inputs[n], key=lambda port: -int(port[2:].split("g")[0]))
        d_order = sorted(d_inputs[n], key=lambda port: -int(port[2:].split("g")[0]))
        c_elems, c_spares = _cascade(c_order, f"c{n}", f"cc{n}")
        d_elems, d_spares = _cascade(d_order, f"d{n}", f"dc{n}")
        elements += c_elems + d_elems
        detectors[f"C_{n}"] = f"c{n}"
        detectors[f"D_{n}"] = f"d{n}"
        for k, spare in enumerate(c_spares, start=2):
            detectors[f"XC_{n}_{k}"] = spare
        for k, spare in enumerate(d_spares, start=2):
            detectors[f"XD_{n}_{k}"] = spare

    return Circuit(["in"], elements, detectors, name=f"nbonacci-{order}")


def build_tribonacci_tree(seq: SequenceSpec | SequenceWindow) -> Circuit:
    """
    Order-3 tree: C_n ~ l_n + l_{n-1} + l_{n-2}, D_n ~ l_n - l_{n-1} - l_{n-2}.

    Raises:
        BuilderError: If the window holds fewer than 4 values
    """
    return build_nbonacci_tree(seq, 3)


class NBonacciTreeBuilder(BaseBuilder):
    """
    Order-r detection tree.

    Params:
        seq: SequenceSpec fields; defaults to the recurrence of the given order
        order: Recurrence order (default 3)
    """

    default_order = 3

    @property
    def name(self) -> str:
        return "nbonacci"

    @property
    def description(self) -> str:
        return "Spokes split r ways; groups of r adjacent spokes interfere at C_n and D_n"

    def build(self, **params: Any) -> BuildResult:
        order = int_param(params, "order", self.default_order)
        if params.get("seq") is None:
            kind = SequenceKind.TRIBONACCI if order == 3 else SequenceKind.FIBONACCI
            seq = SequenceSpec(kind=kind, range=(1, 200)) if order in (2, 3) else _nbonacci_spec(order)
        else:
            seq = sequence_param(params["seq"])
        window = SequenceWindow(seq)
        circuit = build_nbonacci_tree(window, order)
        self.logger.info(f"Built order-{order} tree over {len(window)} values ({len(circuit)} elements)")
        return BuildResult(self.name, circuit, params, data={"window": window, "order": order})

    def checks(self, result: BuildResult) -> list[VerificationCheck]:
        window: SequenceWindow = result.data["window"]
        order: int = result.data["order"]
        circuit = result.circuit
        projectors = detector_projectors(circuit, source_basis(circuit, window.values))

        checks: list[VerificationCheck] = []
        for n in tree_groups(window, order):
            values = [window.value(n - j) for j in range(order)]
            signs = [1.0] + [-1.0] * (order - 1)
            weight = 1.0 / (2 * order)
            checks += bra_check(projectors, f"C_{n}", ket(values, [1.0] * order), weight=weight)
            checks += bra_check(projectors, f"D_{n}", ket(values, signs), weight=weight)

            uniform = ket(values, [1.0] * order).normalized()
            dist = probabilities(circuit, uniform)
            expected = (order - 2) ** 2 / order**2
            ratio = dist.probability(f"D_{n}") / dist.probability(f"C_{n}")
            checks.append(VerificationCheck.measure(f"uniform D_{n}/C_{n}", abs(ratio - expected), ORACLE_TOLERANCE))
        return checks


class TribonacciTreeBuilder(NBonacciTreeBuilder):
    """Order-3 tree over the Tribonacci sequence."""

    @property
    def name(self) -> str:
        return "tribonacci"

    @property
    def description(self) -> str:
        return "Tribonacci tree: C_n ~ l_n + l_{n-1} + l_{n-2}, D_n ~ l_n - l_{n-1} - l_{n-2}"

    def build(self, **params: Any) -> BuildResult:
        params = {**params, "order": 3}
        result = super().build(**params)
        result.name = self.name
        return result


def _nbonacci_spec(order: int) -> SequenceSpec:
    initial = tuple(2**k for k in range(order))
    return SequenceSpec(kind=SequenceKind.CUSTOM, initial=initial, coefficients=(1,) * order, range=(1, 400))

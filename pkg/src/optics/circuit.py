"""
Circuit graph, sparse forward simulation and the dense transfer-matrix oracle.

A Circuit is validated once at construction: every port has one producer
(a source, a routing element, or implicit vacuum on a beam-splitter input),
at most one routing consumer, and the routing graph is acyclic. Elements are
stored in a canonical topological order, so two circuits built from the same
statements in different textual orders compare equal.

Usage:
    from src.optics.circuit import Circuit, simulate, transfer_matrix

    circuit = Circuit(["in"], [BeamSplitter("in", "aux", "c", "d")], {"C": "c", "D": "d"})
    out = simulate(circuit, PureState.basis("in", 3))
"""

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence
import heapq
import logging

import numpy as np

from src.core.config import LOSS_OUTCOME
from src.core.errors import CircuitError, StateError, TopologyError, UnknownPortError, UnknownSourceError
from src.optics.elements import BeamSplitter, Element
from src.optics.state import Label, Mode, PureState, sort_modes

logger = logging.getLogger(__name__)


class Circuit:
    """
    Immutable optical circuit.

    Args:
        sources: Ports where input light enters
        elements: Elements in any order; a canonical order is computed
        detectors: Detector name -> port
        name: Optional apparatus name, carried into reports
    """

    def __init__(
        self,
        sources: Iterable[str],
        elements: Sequence[Element],
        detectors: Optional[Mapping[str, str]] = None,
        name: str = "",
    ):
        self.name = name
        source_list = list(sources)
        if len(set(source_list)) != len(source_list):
            dup = next(s for s in source_list if source_list.count(s) > 1)
            raise TopologyError(f"source '{dup}' declared twice", port=dup)
        self.sources: tuple[str, ...] = tuple(sorted(source_list))
        self.detectors: dict[str, str] = dict(detectors or {})

        self._producer: dict[str, Optional[int]] = {s: None for s in self.sources}
        self._consumer: dict[str, int] = {}
        self.vacuum_ports: frozenset[str] = frozenset()

        self._validate_ports(list(elements))
        self.elements: tuple[Element, ...] = tuple(self._canonical_order(list(elements)))
        self._validate_detectors()
        self.ports: frozenset[str] = frozenset(self._producer) | self.vacuum_ports

    # ------------------------------------------------------------------
    # Validation
    # ------------------------------------------------------------------

    def _validate_ports(self, elements: list[Element]) -> None:
        for index, element in enumerate(elements):
            if element.in_place:
                continue
            for port in element.outputs:
                if port in self._producer:
                    raise TopologyError(f"port '{port}' is produced twice", port=port, element_index=index)
                self._producer[port] = index

        vacuum: set[str] = set()
        for index, element in enumerate(elements):
            if element.in_place:
                (port,) = element.inputs
                if port not in self._producer:
                    raise UnknownPortError(
                        f"{element.keyword} acts on port '{port}' that nothing produces",
                        port=port,
                        element_index=index,
                    )
                continue

            missing = [p for p in element.inputs if p not in self._producer]
            if isinstance(element, BeamSplitter) and len(missing) < 2:
                vacuum.update(missing)
            elif missing:
                raise UnknownPortError(
                    f"{element.keyword} reads port '{missing[0]}' that nothing produces",
                    port=missing[0],
                    element_index=index,
                )

            for port in element.inputs:
                if port in self._consumer:
                    raise TopologyError(f"port '{port}' is consumed twice", port=port, element_index=index)
                self._consumer[port] = index

        self.vacuum_ports = frozenset(vacuum)

    def _canonical_order(self, elements: list[Element]) -> list[Element]:
        in_place: dict[str, list[Element]] = {}
        routing: list[tuple[int, Element]] = []
        for index, element in enumerate(elements):
            if element.in_place:
                in_place.setdefault(element.inputs[0], []).append(element)
            else:
                routing.append((index, element))

        # Kahn: an element is ready once every produced input is available
        waiting: dict[int, int] = {}
        dependents: dict[str, list[int]] = {}
        for index, element in routing:
            produced_inputs = [p for p in element.inputs if p not in self.vacuum_ports]
            waiting[index] = len(produced_inputs)
            for port in produced_inputs:
                dependents.setdefault(port, []).append(index)

        by_index = dict(routing)
        order: list[Element] = []
        ready: list[tuple[str, int]] = []

        def make_available(port: str) -> None:
            order.extend(in_place.get(port, []))
            for dependent in dependents.get(port, []):
                waiting[dependent] -= 1
                if waiting[dependent] == 0:
                    heapq.heappush(ready, (by_index[dependent].inputs[0], dependent))

        for index, count in waiting.items():
            if count == 0:
                heapq.heappush(ready, (by_index[index].inputs[0], index))
        for source in self.sources:
            make_available(source)

        while ready:
            _, index = heapq.heappop(ready)
            element = by_index[index]
            order.append(element)
            for port in element.outputs:
                make_available(port)

        stuck = [index for index, count in waiting.items() if count > 0]
        if stuck:
            first = min(stuck)
            raise TopologyError(
                f"cycle through port '{by_index[first].inputs[0]}'",
                port=by_index[first].inputs[0],
                element_index=first,
            )
        return order

    def _validate_detectors(self) -> None:
        seen: dict[str, str] = {}
        for name, port in self.detectors.items():
            if name == LOSS_OUTCOME:
                raise TopologyError(f"detector name '{name}' is reserved for undetected photons", port=port, detector=name)
            if port not in self._producer:
                raise UnknownPortError(f"detector '{name}' watches port '{port}' that nothing produces", port=port, detector=name)
            if port in self._consumer:
                raise TopologyError(f"detector '{name}' watches port '{port}' that an element consumes", port=port, detector=name)
            if port in seen:
                raise TopologyError(f"detectors '{seen[port]}' and '{name}' share port '{port}'", port=port, detector=name)
            seen[port] = name

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------

    @property
    def terminal_ports(self) -> list[str]:
        """Produced ports no routing element consumes: detectors, rejects, open outputs."""
        return sorted(p for p in self._producer if p not in self._consumer)

    @property
    def open_ports(self) -> list[str]:
        """Terminal ports without a detector."""
        watched = set(self.detectors.values())
        return [p for p in self.terminal_ports if p not in watched]

    def detector_at(self, port: str) -> Optional[str]:
        for name, watched in self.detectors.items():
            if watched == port:
                return name
        return None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Circuit):
            return NotImplemented
        return (
            self.sources == other.sources
            and self.elements == other.elements
            and self.detectors == other.detectors
        )

    def __hash__(self) -> int:
        return hash((self.sources, self.elements, tuple(sorted(self.detectors.items()))))

    def __len__(self) -> int:
        return len(self.elements)

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return (
            f"Circuit{label}(sources={len(self.sources)}, elements={len(self.elements)}, "
            f"detectors={len(self.detectors)})"
        )


# =============================================================================
# Sparse simulation
# =============================================================================

def check_input(circuit: Circuit, state: PureState) -> None:
    """
    Raises:
        UnknownSourceError: If amplitude sits on a non-source path
        StateError: If the squared norm exceeds 1
    """
    sources = set(circuit.sources)
    for path in sorted(state.paths()):
        if path not in sources:
            raise UnknownSourceError(f"input amplitude on '{path}', which is not a source", port=path)
    state.validate()


def simulate(circuit: Circuit, state: PureState) -> PureState:
    """Propagate a state through every element in canonical order."""
    check_input(circuit, state)
    for element in circuit.elements:
        state = element.apply(state, circuit.ports)
    return state


def propagate(circuit: Circuit, mode: Mode) -> PureState:
    """Image of one basis mode; no norm check."""
    if mode.path not in circuit.sources:
        raise UnknownSourceError(f"input mode {mode} is not on a source", port=mode.path)
    state = PureState.basis(mode.path, mode.label)
    for element in circuit.elements:
        state = element.apply(state)
    return state


# =============================================================================
# Dense oracle
# =============================================================================

@dataclass
class TransferMatrix:
    """Dense matrix indexed by (output mode, input mode)."""

    matrix: np.ndarray
    input_basis: list[Mode]
    output_basis: list[Mode]

    def row_indices(self, path: str) -> list[int]:
        return [i for i, mode in enumerate(self.output_basis) if mode.path == path]

    def column(self, mode: Mode) -> np.ndarray:
        return self.matrix[:, self.input_basis.index(mode)]

    def apply(self, state: PureState) -> PureState:
        return PureState.from_vector(self.output_basis, self.matrix @ state.to_vector(self.input_basis))


def transfer_matrix(circuit: Circuit, input_basis: Sequence[Mode]) -> TransferMatrix:
    """
    Dense transfer matrix built as an explicit product of per-element matrices.

    The live mode set is tracked element by element, so each factor maps the
    modes that can carry amplitude before the element onto those after it.

    Raises:
        UnknownSourceError: If a basis mode is not on a source path
    """
    basis = list(input_basis)
    sources = set(circuit.sources)
    for mode in basis:
        if mode.path not in sources:
            raise UnknownSourceError(f"basis mode {mode} is not on a source", port=mode.path)

    live: list[Mode] = list(dict.fromkeys(basis))
    embed = np.zeros((len(live), len(basis)), dtype=complex)
    for j, mode in enumerate(basis):
        embed[live.index(mode), j] = 1.0
    m = embed

    for element in circuit.elements:
        consumed = set(element.inputs)
        kept = [mode for mode in live if mode.path not in consumed]
        images: dict[Mode, list[tuple[Mode, complex]]] = {
            mode: element.local_action(mode) for mode in live if mode.path in consumed
        }
        new_live = list(dict.fromkeys(kept + [t for image in images.values() for t, _ in image]))
        position = {mode: i for i, mode in enumerate(new_live)}

        step = np.zeros((len(new_live), len(live)), dtype=complex)
        for j, mode in enumerate(live):
            if mode in images:
                for target, coef in images[mode]:
                    step[position[target], j] += coef
            else:
                step[position[mode], j] = 1.0
        m = step @ m
        live = new_live

    output_basis = sort_modes(live)
    order = [live.index(mode) for mode in output_basis]
    return TransferMatrix(matrix=m[order, :], input_basis=basis, output_basis=output_basis)


@dataclass
class DetectorProjector:
    """
    Effective measurement of one bucket detector.

    `rows` holds, per label arriving at the detector, the raw transfer-matrix
    row over the input basis. The firing probability for input psi is
    sum_label |row . psi|^2.
    """

    name: str
    port: str
    input_basis: list[Mode]
    rows: dict[Label, np.ndarray] = field(default_factory=dict)

    @property
    def row(self) -> np.ndarray:
        """The single row of a detector that sees one label."""
        if len(self.rows) != 1:
            raise StateError(f"detector '{self.name}' sees {len(self.rows)} labels; use .rows")
        return next(iter(self.rows.values()))

    @property
    def bra(self) -> PureState:
        """The detected state written as a ket: amplitudes conj(row)."""
        return PureState.from_vector(self.input_basis, np.conj(self.row))

    @property
    def weight(self) -> float:
        """POVM weight: total squared norm of the rows."""
        return float(sum(np.vdot(r, r).real for r in self.rows.values()))

    def probability(self, state: PureState) -> float:
        vector = state.to_vector(self.input_basis)
        return float(sum(abs(np.dot(r, vector)) ** 2 for r in self.rows.values()))


def detector_projectors(circuit: Circuit, input_basis: Sequence[Mode]) -> dict[str, DetectorProjector]:
    """Per-detector rows of the dense transfer matrix."""
    tm = transfer_matrix(circuit, input_basis)
    projectors: dict[str, DetectorProjector] = {}
    for name, port in sorted(circuit.detectors.items()):
        projector = DetectorProjector(name=name, port=port, input_basis=tm.input_basis)
        for i in tm.row_indices(port):
            row = tm.matrix[i, :]
            if np.max(np.abs(row), initial=0.0) > 0.0:
                projector.rows[tm.output_basis[i].label] = row.copy()
        projectors[name] = projector
    return projectors


def check_isometry(circuit: Circuit, basis: Sequence[Mode]) -> float:
    """max |M^H M - I|; 0 for lossless circuits."""
    if not basis:
        return 0.0
    m = transfer_matrix(circuit, basis).matrix
    gram = m.conj().T @ m
    return float(np.max(np.abs(gram - np.eye(gram.shape[0]))))


def source_basis(circuit: Circuit, labels: Iterable[Label], sources: Optional[Iterable[str]] = None) -> list[Mode]:
    """Modes for every (source, label) pair, in sorted order."""
    paths = list(sources) if sources is not None else list(circuit.sources)
    return sort_modes(Mode(path, label) for path in paths for label in labels)


def identity_circuit(ports: Iterable[str], detectors: Optional[Mapping[str, str]] = None) -> Circuit:
    """Sources wired straight to detectors."""
    return Circuit(list(ports), [], detectors)


__all__ = [
    "Circuit",
    "CircuitError",
    "DetectorProjector",
    "TransferMatrix",
    "check_input",
    "check_isometry",
    "detector_projectors",
    "identity_circuit",
    "propagate",
    "simulate",
    "source_basis",
    "transfer_matrix",
]

"""
Optical elements and their action on sparse states.

Every element describes the image of a single basis mode through
`local_action`; the sparse `apply` and the dense oracle in circuit.py are both
built on it, so the two can only disagree through bookkeeping, never physics.

Routing elements (BeamSplitter, Sorter, Merge) consume their input ports and
produce new ones. In-place elements (PhaseShift, Attenuator, OamShift,
LabelUnitary, HalfWavePlate) act on one port and leave it under the same name.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional
import cmath
import math

import numpy as np

from src.core.config import DEFAULT_LABEL_BOUND, EXACT_TOLERANCE
from src.core.errors import ElementError, LabelKindError, PortNotFoundError
from src.optics.state import Label, Mode, Polarization, PureState, is_oam, label_sort_key

INV_SQRT2 = 1.0 / math.sqrt(2.0)

Image = list[tuple[Mode, complex]]


class Element(ABC):
    """Base class for optical elements."""

    @property
    @abstractmethod
    def inputs(self) -> tuple[str, ...]:
        """Ports the element reads."""

    @property
    @abstractmethod
    def outputs(self) -> tuple[str, ...]:
        """Ports the element writes."""

    @property
    def in_place(self) -> bool:
        return self.inputs == self.outputs

    @abstractmethod
    def local_action(self, mode: Mode) -> Image:
        """Image of the basis state |mode> for a mode on one of the input ports."""

    def apply(self, state: PureState, known_ports: Optional[Iterable[str]] = None) -> PureState:
        """
        Transform the amplitudes on this element's input ports.

        Args:
            state: Input state; paths the element does not read are untouched
            known_ports: If given, every input port must be in this set

        Raises:
            PortNotFoundError: If an input port is not in known_ports
            LabelKindError: If an OAM-only element meets a polarization label
        """
        if known_ports is not None:
            known = set(known_ports)
            for port in self.inputs:
                if port not in known:
                    raise PortNotFoundError(f"{self.keyword} reads unknown port '{port}'")

        updates: dict[str, dict[Label, complex]] = {}
        for port in self.inputs:
            for label, amp in state.on_path(port).items():
                for target, coef in self.local_action(Mode(port, label)):
                    bucket = updates.setdefault(target.path, {})
                    bucket[target.label] = bucket.get(target.label, 0j) + amp * coef
        return state.with_paths(updates, removed=self.inputs)

    @property
    def keyword(self) -> str:
        return type(self).__name__


# =============================================================================
# Routing elements
# =============================================================================

class BSConvention(str, Enum):
    HADAMARD = "hadamard"
    SYMMETRIC = "symmetric"


@dataclass(frozen=True)
class BeamSplitter(Element):
    """
    Two-in two-out splitter with amplitude transmission `ratio`.

    With r = ratio and s = sqrt(1 - r^2):
        hadamard:  c = r a + s b,    d = s a - r b
        symmetric: c = r a + i s b,  d = i s a + r b
    """

    port_a: str
    port_b: str
    port_c: str
    port_d: str
    ratio: float = INV_SQRT2
    convention: BSConvention = BSConvention.HADAMARD

    def __post_init__(self) -> None:
        object.__setattr__(self, "convention", BSConvention(self.convention))
        if not (0.0 < self.ratio < 1.0) or math.isnan(self.ratio):
            raise ElementError(f"beam splitter ratio must lie in (0, 1), got {self.ratio}")
        ports = (self.port_a, self.port_b, self.port_c, self.port_d)
        if len(set(ports)) != 4:
            raise ElementError(f"beam splitter ports must be distinct, got {ports}")

    @property
    def inputs(self) -> tuple[str, ...]:
        return (self.port_a, self.port_b)

    @property
    def outputs(self) -> tuple[str, ...]:
        return (self.port_c, self.port_d)

    def matrix(self) -> np.ndarray:
        """2x2 matrix mapping (a, b) amplitudes to (c, d)."""
        r = self.ratio
        s = math.sqrt(1.0 - r * r)
        if self.convention == BSConvention.HADAMARD:
            return np.array([[r, s], [s, -r]], dtype=complex)
        return np.array([[r, 1j * s], [1j * s, r]], dtype=complex)

    def local_action(self, mode: Mode) -> Image:
        m = self.matrix()
        col = 0 if mode.path == self.port_a else 1
        return [
            (Mode(self.port_c, mode.label), complex(m[0, col])),
            (Mode(self.port_d, mode.label), complex(m[1, col])),
        ]

    @property
    def keyword(self) -> str:
        return "bs"


@dataclass(frozen=True)
class Sorter(Element):
    """
    Routes each label in `table` to its own port, labels unchanged.
    Labels missing from the table go to `reject`.
    """

    in_port: str
    table: Mapping[Label, str]
    reject: str

    def __post_init__(self) -> None:
        table = dict(self.table)
        if not table:
            raise ElementError(f"sorter on '{self.in_port}' has an empty table")
        kinds = {isinstance(label, Polarization) for label in table}
        if len(kinds) > 1:
            raise LabelKindError(f"sorter on '{self.in_port}' mixes OAM and polarization labels")
        outs = list(table.values())
        if len(set(outs)) != len(outs):
            raise ElementError(f"sorter on '{self.in_port}' routes two labels to one port")
        if self.reject in outs or self.in_port in outs or self.reject == self.in_port:
            raise ElementError(f"sorter on '{self.in_port}' reuses a port for input, output and reject")
        object.__setattr__(self, "table", _FrozenTable(table))

    @property
    def polarizing(self) -> bool:
        return isinstance(next(iter(self.table)), Polarization)

    @property
    def inputs(self) -> tuple[str, ...]:
        return (self.in_port,)

    @property
    def outputs(self) -> tuple[str, ...]:
        return tuple(self.table[label] for label in sorted(self.table, key=label_sort_key)) + (self.reject,)

    def local_action(self, mode: Mode) -> Image:
        if self.polarizing != isinstance(mode.label, Polarization):
            raise LabelKindError(f"sorter on '{self.in_port}' cannot route label {mode.label!r}")
        return [(Mode(self.table.get(mode.label, self.reject), mode.label), 1.0 + 0j)]

    @property
    def keyword(self) -> str:
        return "sorter"


@dataclass(frozen=True)
class Merge(Element):
    """
    Inverse routing of a sorter: amplitude on `table[label]` carrying that
    label moves to `out_port`. Other labels arriving on an input are dropped,
    which makes Merge the exact adjoint of the matching Sorter.
    """

    out_port: str
    table: Mapping[Label, str]

    def __post_init__(self) -> None:
        table = dict(self.table)
        if not table:
            raise ElementError(f"merge into '{self.out_port}' has an empty table")
        ins = list(table.values())
        if len(set(ins)) != len(ins):
            raise ElementError(f"merge into '{self.out_port}' reads one port twice")
        if self.out_port in ins:
            raise ElementError(f"merge into '{self.out_port}' also reads it")
        object.__setattr__(self, "table", _FrozenTable(table))
        object.__setattr__(self, "_expected", {port: label for label, port in table.items()})

    @property
    def inputs(self) -> tuple[str, ...]:
        return tuple(self.table[label] for label in sorted(self.table, key=label_sort_key))

    @property
    def outputs(self) -> tuple[str, ...]:
        return (self.out_port,)

    def local_action(self, mode: Mode) -> Image:
        if self._expected[mode.path] != mode.label:
            return []
        return [(Mode(self.out_port, mode.label), 1.0 + 0j)]

    @property
    def keyword(self) -> str:
        return "merge"


# =============================================================================
# In-place elements
# =============================================================================

@dataclass(frozen=True)
class PhaseShift(Element):
    port: str
    phi: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.phi):
            raise ElementError(f"phase on '{self.port}' must be finite, got {self.phi}")

    @property
    def inputs(self) -> tuple[str, ...]:
        return (self.port,)

    @property
    def outputs(self) -> tuple[str, ...]:
        return (self.port,)

    def local_action(self, mode: Mode) -> Image:
        return [(mode, cmath.exp(1j * self.phi))]

    @property
    def keyword(self) -> str:
        return "phase"


@dataclass(frozen=True)
class Attenuator(Element):
    """Amplitude transmission t; the missing probability is loss."""

    port: str
    t: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.t <= 1.0):
            raise ElementError(f"attenuation on '{self.port}' must lie in [0, 1], got {self.t}")

    @property
    def inputs(self) -> tuple[str, ...]:
        return (self.port,)

    @property
    def outputs(self) -> tuple[str, ...]:
        return (self.port,)

    def local_action(self, mode: Mode) -> Image:
        return [(mode, complex(self.t))]

    @property
    def keyword(self) -> str:
        return "atten"


@dataclass(frozen=True)
class OamShift(Element):
    """Adds `delta` to the OAM label on one port; shifted labels must stay within `bound`."""

    port: str
    delta: int
    bound: int = field(default=DEFAULT_LABEL_BOUND, compare=False)

    def __post_init__(self) -> None:
        if not is_oam(self.delta):
            raise ElementError(f"OAM shift on '{self.port}' must be an integer, got {self.delta!r}")

    @property
    def inputs(self) -> tuple[str, ...]:
        return (self.port,)

    @property
    def outputs(self) -> tuple[str, ...]:
        return (self.port,)

    def local_action(self, mode: Mode) -> Image:
        if not is_oam(mode.label):
            raise LabelKindError(f"OAM shift on '{self.port}' met polarization label {mode.label}")
        shifted = mode.label + self.delta
        if abs(shifted) > self.bound:
            raise ElementError(f"OAM shift on '{self.port}' takes label {mode.label} to {shifted}, beyond bound {self.bound}")
        return [(Mode(mode.path, shifted), 1.0 + 0j)]

    @property
    def keyword(self) -> str:
        return "shift"


@dataclass(frozen=True)
class LabelUnitary(Element):
    """
    2x2 unitary on the amplitudes of two labels of one port, (a1, a2) -> M (a1, a2).
    Other labels pass unchanged.
    """

    port: str
    labels: tuple[Label, Label]
    matrix: tuple[tuple[complex, complex], tuple[complex, complex]]

    def __post_init__(self) -> None:
        l1, l2 = self.labels
        if l1 == l2:
            raise ElementError(f"label unitary on '{self.port}' needs two distinct labels")
        if isinstance(l1, Polarization) != isinstance(l2, Polarization):
            raise LabelKindError(f"label unitary on '{self.port}' mixes label kinds")
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2) or not np.all(np.isfinite(m)):
            raise ElementError(f"label unitary on '{self.port}' needs a finite 2x2 matrix")
        defect = float(np.max(np.abs(m.conj().T @ m - np.eye(2))))
        if defect > EXACT_TOLERANCE:
            raise ElementError(f"label unitary on '{self.port}' is not unitary (defect {defect:.3g})")
        object.__setattr__(
            self, "matrix", tuple(tuple(complex(x) for x in row) for row in m.tolist())
        )

    @property
    def inputs(self) -> tuple[str, ...]:
        return (self.port,)

    @property
    def outputs(self) -> tuple[str, ...]:
        return (self.port,)

    def local_action(self, mode: Mode) -> Image:
        l1, l2 = self.labels
        if mode.label == l1:
            col = 0
        elif mode.label == l2:
            col = 1
        else:
            return [(mode, 1.0 + 0j)]
        return [
            (Mode(self.port, l1), self.matrix[0][col]),
            (Mode(self.port, l2), self.matrix[1][col]),
        ]

    @property
    def keyword(self) -> str:
        return "lunitary"


class HWPOrientation(str, Enum):
    PLUS45 = "plus45"
    MINUS45 = "minus45"


def _hwp_matrix(orientation: HWPOrientation) -> tuple[tuple[complex, complex], tuple[complex, complex]]:
    # Acts on (a_H, a_V); plus45 takes V to (H + V)/sqrt(2)
    c = s = INV_SQRT2
    if orientation == HWPOrientation.PLUS45:
        return ((c, s), (-s, c))
    return ((c, -s), (s, c))


@dataclass(frozen=True)
class HalfWavePlate(LabelUnitary):
    """Polarization rotation by +-45 degrees on the (H, V) amplitudes of one port."""

    port: str
    orientation: HWPOrientation = HWPOrientation.PLUS45
    labels: tuple[Label, Label] = field(default=(Polarization.H, Polarization.V), init=False)
    matrix: tuple = field(default=(), init=False)

    def __post_init__(self) -> None:
        orientation = HWPOrientation(self.orientation)
        object.__setattr__(self, "orientation", orientation)
        object.__setattr__(self, "matrix", _hwp_matrix(orientation))
        super().__post_init__()

    @property
    def keyword(self) -> str:
        return "hwp"


def half_wave_plate(to_diagonal: HWPOrientation | str, port: str = "in") -> HalfWavePlate:
    """Half-wave plate rotating vertical and horizontal input to the requested diagonal."""
    return HalfWavePlate(port, HWPOrientation(to_diagonal))


class _FrozenTable(dict):
    """Hashable read-only label table."""

    def __hash__(self) -> int:  # type: ignore[override]
        return hash(tuple(sorted(((label_sort_key(k), v) for k, v in self.items()))))

    def _readonly(self, *args, **kwargs):
        raise TypeError("label tables are read-only")

    __setitem__ = __delitem__ = update = pop = popitem = clear = setdefault = _readonly  # type: ignore[assignment]

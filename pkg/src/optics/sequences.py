"""
Integer recurrences that supply OAM label sets, and the named state families.

Indices follow the convention F_1 = 1, F_2 = 2, so the Fibonacci values between
2 and 55 are F_2 .. F_9.

Usage:
    from src.optics.sequences import SequenceSpec, SequenceWindow, make_named_state

    spec = SequenceSpec(kind="fibonacci", range=(2, 55))
    generate_sequence(spec)            # [2, 3, 5, 8, 13, 21, 34, 55]
    make_named_state("S", 5, spec)     # (|F_4> + |F_6>)/sqrt(2) on path "in"
"""

from enum import Enum
from fractions import Fraction
from typing import Optional
import logging
import math

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.core.config import (
    DEFAULT_LABEL_BOUND,
    FIBONACCI_INITIAL,
    LUCAS_INITIAL,
    MAX_SEQUENCE_TERMS,
    TRIBONACCI_INITIAL,
)
from src.core.errors import IndexOutOfRangeError, SequenceError, SequenceOverflowError
from src.optics.state import PureState

logger = logging.getLogger(__name__)


class SequenceKind(str, Enum):
    FIBONACCI = "fibonacci"
    LUCAS = "lucas"
    TRIBONACCI = "tribonacci"
    CUSTOM = "custom"


_PRESETS: dict[SequenceKind, tuple[tuple[int, ...], tuple[int, ...]]] = {
    SequenceKind.FIBONACCI: (FIBONACCI_INITIAL, (1, 1)),
    SequenceKind.LUCAS: (LUCAS_INITIAL, (1, 1)),
    SequenceKind.TRIBONACCI: (TRIBONACCI_INITIAL, (1, 1, 1)),
}


class SequenceSpec(BaseModel):
    """
    A linear recurrence x_k = c_1 x_{k-1} + ... + c_r x_{k-r}.

    `coefficients[0]` multiplies the most recent term. Preset kinds fill in
    `initial` and `coefficients`; `custom` requires both.
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    kind: SequenceKind = SequenceKind.FIBONACCI
    initial: Optional[tuple[int, ...]] = None
    coefficients: Optional[tuple[int, ...]] = None
    value_range: tuple[int, int] = Field(default=(1, DEFAULT_LABEL_BOUND), alias="range")
    label_bound: int = Field(default=DEFAULT_LABEL_BOUND, gt=0)

    @model_validator(mode="after")
    def _fill_preset(self) -> "SequenceSpec":
        if self.kind != SequenceKind.CUSTOM:
            preset_initial, preset_coeffs = _PRESETS[self.kind]
            if self.initial is None:
                object.__setattr__(self, "initial", preset_initial)
            if self.coefficients is None:
                object.__setattr__(self, "coefficients", preset_coeffs)
        if not self.initial or not self.coefficients:
            raise ValueError("custom sequences need both initial values and coefficients")
        if len(self.initial) != len(self.coefficients):
            raise ValueError(
                f"need one initial value per coefficient, got {len(self.initial)} and {len(self.coefficients)}"
            )
        return self

    @property
    def order(self) -> int:
        return len(self.coefficients)

    def indexed_terms(self) -> list[tuple[int, int]]:
        """(index, value) for every recurrence member inside the range, ascending."""
        lo, hi = self.value_range
        if lo > hi:
            return []

        terms = list(self.initial)
        out: list[tuple[int, int]] = []
        previous: Optional[int] = None
        index = 0
        while True:
            index += 1
            if index <= len(self.initial):
                value = self.initial[index - 1]
            else:
                value = sum(c * x for c, x in zip(self.coefficients, reversed(terms[-self.order:])))
                terms.append(value)

            if previous is not None and value <= previous:
                raise SequenceError(f"sequence is not strictly increasing at index {index}: {previous} -> {value}")
            previous = value

            if value > hi:
                break
            if value >= lo:
                if abs(value) > self.label_bound:
                    raise SequenceOverflowError(
                        f"term x_{index} = {value} exceeds label bound {self.label_bound}"
                    )
                out.append((index, value))
            if index >= MAX_SEQUENCE_TERMS:
                raise SequenceError(f"no term above {hi} within {MAX_SEQUENCE_TERMS} terms")
        return out

    def window(self) -> "SequenceWindow":
        return SequenceWindow(self)


def generate_sequence(spec: SequenceSpec) -> list[int]:
    """All recurrence members within the SequenceSpec range, ascending."""
    return [value for _, value in spec.indexed_terms()]


class SequenceWindow:
    """
    Index lookup over the generated terms of a SequenceSpec.

    Usage:
        window = SequenceWindow(SequenceSpec(range=(2, 55)))
        window.value(5)   # 8
        window.index_of(21)  # 7
    """

    def __init__(self, spec: SequenceSpec):
        self.spec = spec
        self._by_index = dict(spec.indexed_terms())
        self._by_value = {v: n for n, v in self._by_index.items()}

    @property
    def indices(self) -> list[int]:
        return sorted(self._by_index)

    @property
    def values(self) -> list[int]:
        return [self._by_index[n] for n in self.indices]

    def value(self, index: int) -> int:
        try:
            return self._by_index[index]
        except KeyError:
            raise IndexOutOfRangeError(
                f"index {index} outside generated window {self.indices[:1]}..{self.indices[-1:]}"
            ) from None

    def index_of(self, value: int) -> int:
        try:
            return self._by_value[value]
        except KeyError:
            raise IndexOutOfRangeError(f"value {value} is not a member of the window") from None

    def has(self, index: int) -> bool:
        return index in self._by_index

    def chain(self, parity: int) -> list[int]:
        """Indices with index % 2 == parity."""
        return [n for n in self.indices if n % 2 == parity]

    def restricted(self, first: int, last: int) -> list[tuple[int, int]]:
        """(index, value) pairs with first <= index <= last."""
        return [(n, self._by_index[n]) for n in self.indices if first <= n <= last]

    def __len__(self) -> int:
        return len(self._by_index)

    def __contains__(self, index: object) -> bool:
        return index in self._by_index

    def __repr__(self) -> str:
        return f"SequenceWindow(kind={self.spec.kind.value}, indices={self.indices[:1]}..{self.indices[-1:]})"


class StateFamily(str, Enum):
    F = "F"
    S = "S"
    C = "C"
    D = "D"


def make_named_state(
    family: StateFamily | str,
    n: int,
    seq: SequenceSpec | SequenceWindow,
    path: str = "in",
) -> PureState:
    """
    Build one of the named states on a single path.

    F_n is the eigenstate, S_n = (F_{n-1} + F_{n+1})/sqrt(2),
    C_n = i (F_n + F_{n-2})/sqrt(2) and D_n = (F_n - F_{n-2})/sqrt(2).

    Raises:
        IndexOutOfRangeError: If a required index lies outside the window
    """
    family = StateFamily(family)
    window = seq if isinstance(seq, SequenceWindow) else SequenceWindow(seq)
    r = 1.0 / math.sqrt(2.0)

    if family == StateFamily.F:
        return PureState.basis(path, window.value(n))
    if family == StateFamily.S:
        lower, upper = window.value(n - 1), window.value(n + 1)
        return PureState.superposition(path, {lower: r, upper: r})
    low, high = window.value(n - 2), window.value(n)
    if family == StateFamily.C:
        return PureState.superposition(path, {high: 1j * r, low: 1j * r})
    return PureState.superposition(path, {high: r, low: -r})


def parse_state_spec(text: str, seq: SequenceSpec | SequenceWindow, path: str = "in") -> PureState:
    """
    Read an input-state spec: a named state like "S:7", or explicit amplitudes
    "label=amp,label=amp" where amp is any Python complex literal.

    The explicit form is normalized.
    """
    text = text.strip()
    head, sep, tail = text.partition(":")
    if sep and head.upper() in StateFamily.__members__ and "=" not in text:
        try:
            index = int(tail)
        except ValueError as e:
            raise SequenceError(f"state index must be an integer, got {tail!r}") from e
        return make_named_state(head.upper(), index, seq, path)

    amplitudes: dict[int, complex] = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        label_text, eq, amp_text = part.partition("=")
        if not eq:
            raise SequenceError(f"expected label=amplitude, got {part!r}")
        try:
            label = int(label_text)
            amp = complex(amp_text.replace(" ", ""))
        except ValueError as e:
            raise SequenceError(f"bad amplitude term {part!r}") from e
        amplitudes[label] = amplitudes.get(label, 0j) + amp
    state = PureState.superposition(path, amplitudes)
    if not state:
        raise SequenceError(f"input spec {text!r} describes the vacuum")
    return state.normalized()


def fibonacci_fraction(lo: int, hi: int) -> Fraction:
    """
    Share of the integers in [lo, hi] that are Fibonacci numbers (F_1 = 1, F_2 = 2).

    Raises:
        SequenceError: If lo > hi
    """
    if lo > hi:
        raise SequenceError(f"empty range [{lo}, {hi}]")
    count = 0
    a, b = FIBONACCI_INITIAL
    while a <= hi:
        if a >= lo:
            count += 1
        a, b = b, a + b
    return Fraction(count, hi - lo + 1)

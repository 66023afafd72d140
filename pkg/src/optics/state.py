"""
Sparse amplitude maps for single photons and photon pairs.

A Mode is a (path, label) pair. The label is either an integer OAM topological
charge or a polarization tag, never both. PureState stores amplitudes grouped by
path so that an element touches only the paths it acts on.

Usage:
    from src.optics.state import Mode, PureState, inner

    psi = PureState.superposition("in", {3: 1.0, 8: 1.0}).normalized()
    phi = PureState.basis("in", 3)
    inner(phi, psi)  # 1/sqrt(2)
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple, Union
import cmath
import math

import numpy as np

from src.core.config import DEFAULT_LABEL_BOUND, NORM_EPSILON, PRUNE_THRESHOLD
from src.core.errors import LabelKindError, StateError


class Polarization(str, Enum):
    """Polarization tags used by the polarization analog apparatuses."""

    H = "H"
    V = "V"

    def __str__(self) -> str:
        return self.value


Label = Union[int, Polarization]


def is_oam(label: Label) -> bool:
    """True for an integer OAM label."""
    return isinstance(label, int) and not isinstance(label, bool)


def parse_label(token: str) -> Label:
    """Read a label token: 'H', 'V' or a signed decimal integer."""
    if token in ("H", "V"):
        return Polarization(token)
    try:
        return int(token)
    except ValueError as e:
        raise LabelKindError(f"not a label: {token!r}") from e


def check_label(label: Label, bound: int = DEFAULT_LABEL_BOUND) -> Label:
    """Validate a label's kind and, for OAM labels, its magnitude."""
    if isinstance(label, Polarization):
        return label
    if not is_oam(label):
        raise LabelKindError(f"label must be an integer or H/V, got {label!r}")
    if abs(label) > bound:
        raise StateError(f"OAM label {label} exceeds bound {bound}")
    return label


def label_sort_key(label: Label) -> Tuple[int, Union[int, str]]:
    # Integers sort before polarization tags
    if isinstance(label, Polarization):
        return (1, label.value)
    return (0, label)


@dataclass(frozen=True)
class Mode:
    """A spatial path together with an internal label."""

    path: str
    label: Label

    def __post_init__(self) -> None:
        if not isinstance(self.path, str) or not self.path:
            raise StateError(f"path must be a non-empty string, got {self.path!r}")
        if not isinstance(self.label, Polarization) and not is_oam(self.label):
            raise LabelKindError(f"label must be an integer or H/V, got {self.label!r}")

    def sort_key(self) -> Tuple[str, Tuple[int, Union[int, str]]]:
        return (self.path, label_sort_key(self.label))

    def __str__(self) -> str:
        return f"{self.path}:{self.label}"


def sort_modes(modes: Iterable[Mode]) -> list[Mode]:
    """Deterministic mode order: by path, then integers before tags."""
    return sorted(modes, key=Mode.sort_key)


class PureState:
    """
    Sparse complex amplitude map over Modes.

    States may be sub-normalized: the missing squared norm is probability lost
    to attenuation or rejected by a sorter. Values are treated as immutable;
    every operation returns a new state.
    """

    __slots__ = ("_paths",)

    def __init__(self, amplitudes: Optional[Mapping[Mode, complex]] = None):
        paths: Dict[str, Dict[Label, complex]] = {}
        for mode, amp in (amplitudes or {}).items():
            amp = complex(amp)
            if abs(amp) < PRUNE_THRESHOLD:
                continue
            bucket = paths.setdefault(mode.path, {})
            bucket[mode.label] = bucket.get(mode.label, 0j) + amp
        self._paths = _pruned(paths)

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------

    @classmethod
    def _from_paths(cls, paths: Dict[str, Dict[Label, complex]]) -> "PureState":
        state = cls.__new__(cls)
        state._paths = _pruned(paths)
        return state

    @classmethod
    def vacuum(cls) -> "PureState":
        return cls._from_paths({})

    @classmethod
    def basis(cls, path: str, label: Label, amplitude: complex = 1.0) -> "PureState":
        return cls({Mode(path, label): amplitude})

    @classmethod
    def superposition(cls, path: str, amplitudes: Mapping[Label, complex]) -> "PureState":
        """Amplitudes over labels on a single path."""
        return cls({Mode(path, label): amp for label, amp in amplitudes.items()})

    @classmethod
    def from_vector(cls, basis: Sequence[Mode], vector: np.ndarray) -> "PureState":
        return cls({mode: complex(amp) for mode, amp in zip(basis, vector)})

    # ------------------------------------------------------------------
    # Access
    # ------------------------------------------------------------------

    def amplitude(self, mode: Mode) -> complex:
        return self._paths.get(mode.path, {}).get(mode.label, 0j)

    def items(self) -> Iterator[Tuple[Mode, complex]]:
        for path, bucket in self._paths.items():
            for label, amp in bucket.items():
                yield Mode(path, label), amp

    def modes(self) -> list[Mode]:
        return sort_modes(mode for mode, _ in self.items())

    def paths(self) -> set[str]:
        return set(self._paths)

    def on_path(self, path: str) -> Dict[Label, complex]:
        """Label amplitudes on one path (a copy)."""
        return dict(self._paths.get(path, {}))

    def labels(self) -> set[Label]:
        return {label for bucket in self._paths.values() for label in bucket}

    def to_vector(self, basis: Sequence[Mode]) -> np.ndarray:
        return np.array([self.amplitude(mode) for mode in basis], dtype=complex)

    def __len__(self) -> int:
        return sum(len(bucket) for bucket in self._paths.values())

    def __bool__(self) -> bool:
        return bool(self._paths)

    # ------------------------------------------------------------------
    # Norms and arithmetic
    # ------------------------------------------------------------------

    def norm2(self) -> float:
        return float(sum(abs(a) ** 2 for bucket in self._paths.values() for a in bucket.values()))

    def norm(self) -> float:
        return math.sqrt(self.norm2())

    def path_norm2(self, path: str) -> float:
        return float(sum(abs(a) ** 2 for a in self._paths.get(path, {}).values()))

    def normalized(self) -> "PureState":
        n = self.norm()
        if n == 0.0:
            raise StateError("cannot normalize the vacuum")
        return self.scaled(1.0 / n)

    def scaled(self, factor: complex) -> "PureState":
        factor = complex(factor)
        return PureState._from_paths(
            {p: {l: a * factor for l, a in bucket.items()} for p, bucket in self._paths.items()}
        )

    def __add__(self, other: "PureState") -> "PureState":
        if not isinstance(other, PureState):
            return NotImplemented
        merged = {p: dict(bucket) for p, bucket in self._paths.items()}
        for path, bucket in other._paths.items():
            target = merged.setdefault(path, {})
            for label, amp in bucket.items():
                target[label] = target.get(label, 0j) + amp
        return PureState._from_paths(merged)

    def __sub__(self, other: "PureState") -> "PureState":
        if not isinstance(other, PureState):
            return NotImplemented
        return self + other.scaled(-1.0)

    def __mul__(self, factor: complex) -> "PureState":
        return self.scaled(factor)

    __rmul__ = __mul__

    def inner(self, other: "PureState") -> complex:
        """<self|other>; modes missing on either side contribute nothing."""
        total = 0j
        for path, bucket in self._paths.items():
            theirs = other._paths.get(path)
            if not theirs:
                continue
            for label, amp in bucket.items():
                b = theirs.get(label)
                if b is not None:
                    total += amp.conjugate() * b
        return total

    # ------------------------------------------------------------------
    # Path manipulation
    # ------------------------------------------------------------------

    def moved(self, path_map: Mapping[str, str]) -> "PureState":
        """Rename paths; unmapped paths keep their names."""
        out: Dict[str, Dict[Label, complex]] = {}
        for path, bucket in self._paths.items():
            target = out.setdefault(path_map.get(path, path), {})
            for label, amp in bucket.items():
                target[label] = target.get(label, 0j) + amp
        return PureState._from_paths(out)

    def restricted(self, paths: Iterable[str]) -> "PureState":
        keep = set(paths)
        return PureState._from_paths({p: dict(b) for p, b in self._paths.items() if p in keep})

    def path_content(self, path: str, onto: str = "out") -> "PureState":
        """The label content of one path, moved onto a common path name."""
        return PureState._from_paths({onto: dict(self._paths.get(path, {}))})

    def with_paths(self, updates: Mapping[str, Dict[Label, complex]], removed: Iterable[str] = ()) -> "PureState":
        """Replace whole path buckets; used by elements."""
        dropped = set(removed)
        paths = {p: b for p, b in self._paths.items() if p not in dropped}
        for path, bucket in updates.items():
            target = dict(paths.get(path, {}))
            for label, amp in bucket.items():
                target[label] = target.get(label, 0j) + amp
            paths[path] = target
        return PureState._from_paths(paths)

    # ------------------------------------------------------------------
    # Comparison and validation
    # ------------------------------------------------------------------

    def allclose(self, other: "PureState", tol: float = 1e-12) -> bool:
        modes = set(m for m, _ in self.items()) | set(m for m, _ in other.items())
        return all(abs(self.amplitude(m) - other.amplitude(m)) <= tol for m in modes)

    def validate(self) -> "PureState":
        """Check the norm invariant; returns self for chaining."""
        n2 = self.norm2()
        if n2 > 1.0 + NORM_EPSILON:
            raise StateError(f"squared norm {n2:.12g} exceeds 1")
        return self

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PureState):
            return NotImplemented
        return self._paths == other._paths

    def __hash__(self) -> int:
        return hash(tuple(sorted((str(m), a) for m, a in self.items())))

    def __repr__(self) -> str:
        terms = ", ".join(f"{m}={_fmt(a)}" for m, a in sorted(self.items(), key=lambda t: t[0].sort_key()))
        return f"PureState({terms})"


def inner(a: PureState, b: PureState) -> complex:
    """Inner product <a|b>, antilinear in the first argument."""
    return a.inner(b)


def global_phase_distance(a: PureState, b: PureState) -> float:
    """
    Largest amplitude difference between two states after normalizing both and
    removing the best global phase. 0 for states equal up to phase and scale.
    """
    na, nb = a.norm(), b.norm()
    if na == 0.0 or nb == 0.0:
        return 0.0 if na == nb else 1.0
    overlap = a.inner(b)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    aligned = a.scaled(phase / na)
    target = b.scaled(1.0 / nb)
    modes = set(m for m, _ in aligned.items()) | set(m for m, _ in target.items())
    return max((abs(aligned.amplitude(m) - target.amplitude(m)) for m in modes), default=0.0)


def fidelity(a: PureState, b: PureState) -> float:
    """|<a|b>| after normalizing both states."""
    return abs(a.normalized().inner(b.normalized()))


class TwoPhotonState:
    """
    Sparse amplitude map over ordered (photon A, photon B) mode pairs.

    Usage:
        joint = TwoPhotonState.product(psi_a, psi_b)
        evolved = joint.apply_local(0, lambda m: simulate(circuit_a, PureState({m: 1})))
    """

    __slots__ = ("_amps",)

    def __init__(self, amplitudes: Optional[Mapping[Tuple[Mode, Mode], complex]] = None):
        amps: Dict[Tuple[Mode, Mode], complex] = {}
        for pair, amp in (amplitudes or {}).items():
            amps[pair] = amps.get(pair, 0j) + complex(amp)
        self._amps = {k: v for k, v in amps.items() if abs(v) >= PRUNE_THRESHOLD}

    @classmethod
    def product(cls, a: PureState, b: PureState) -> "TwoPhotonState":
        return cls({(ma, mb): aa * ab for ma, aa in a.items() for mb, ab in b.items()})

    def items(self) -> Iterator[Tuple[Tuple[Mode, Mode], complex]]:
        return iter(self._amps.items())

    def amplitude(self, mode_a: Mode, mode_b: Mode) -> complex:
        return self._amps.get((mode_a, mode_b), 0j)

    def modes(self, slot: int) -> list[Mode]:
        return sort_modes({pair[slot] for pair in self._amps})

    def norm2(self) -> float:
        return float(sum(abs(a) ** 2 for a in self._amps.values()))

    def normalized(self) -> "TwoPhotonState":
        n = math.sqrt(self.norm2())
        if n == 0.0:
            raise StateError("cannot normalize the vacuum")
        return TwoPhotonState({k: v / n for k, v in self._amps.items()})

    def scaled(self, factor: complex) -> "TwoPhotonState":
        return TwoPhotonState({k: v * factor for k, v in self._amps.items()})

    def swapped(self) -> "TwoPhotonState":
        return TwoPhotonState({(b, a): v for (a, b), v in self._amps.items()})

    def inner(self, other: "TwoPhotonState") -> complex:
        return sum((a.conjugate() * other._amps.get(k, 0j) for k, a in self._amps.items()), 0j)

    def validate(self) -> "TwoPhotonState":
        n2 = self.norm2()
        if n2 > 1.0 + NORM_EPSILON:
            raise StateError(f"squared norm {n2:.12g} exceeds 1")
        return self

    def apply_local(self, slot: int, response: Callable[[Mode], PureState]) -> "TwoPhotonState":
        """
        Apply a linear single-photon map to one slot. response(m) is the image
        of the basis state |m>; results are cached per input mode.
        """
        cache: Dict[Mode, list[Tuple[Mode, complex]]] = {}
        out: Dict[Tuple[Mode, Mode], complex] = {}
        for (ma, mb), amp in self._amps.items():
            source = ma if slot == 0 else mb
            if source not in cache:
                cache[source] = list(response(source).items())
            for target, coef in cache[source]:
                key = (target, mb) if slot == 0 else (ma, target)
                out[key] = out.get(key, 0j) + amp * coef
        return TwoPhotonState(out)

    def conditional(self, slot: int, functional: Mapping[Mode, complex]) -> PureState:
        """
        Unnormalized state of the other photon after projecting `slot` with the
        linear functional m -> functional[m]. Its squared norm is the
        probability of that projection.
        """
        out: Dict[Mode, complex] = {}
        for (ma, mb), amp in self._amps.items():
            measured, other = (ma, mb) if slot == 0 else (mb, ma)
            coef = functional.get(measured)
            if coef is None:
                continue
            out[other] = out.get(other, 0j) + coef * amp
        return PureState(out)

    def reduced_probabilities(self, slot: int) -> Dict[Mode, float]:
        """Marginal probability of each mode of one photon."""
        probs: Dict[Mode, float] = {}
        for pair, amp in self._amps.items():
            probs[pair[slot]] = probs.get(pair[slot], 0.0) + abs(amp) ** 2
        return probs

    def __len__(self) -> int:
        return len(self._amps)

    def __repr__(self) -> str:
        terms = ", ".join(f"({a},{b})={_fmt(v)}" for (a, b), v in self._amps.items())
        return f"TwoPhotonState({terms})"


def _pruned(paths: Dict[str, Dict[Label, complex]]) -> Dict[str, Dict[Label, complex]]:
    out: Dict[str, Dict[Label, complex]] = {}
    for path, bucket in paths.items():
        kept = {l: a for l, a in bucket.items() if abs(a) >= PRUNE_THRESHOLD}
        if kept:
            out[path] = kept
    return out


def _fmt(amp: complex) -> str:
    if abs(amp.imag) < 1e-15:
        return f"{amp.real:.6g}"
    r, phi = cmath.polar(amp)
    return f"{r:.6g}e^{phi:.4g}i"

"""
Canonical netlist emitter: Circuit -> text.

Sources come first (sorted), then elements in the circuit's canonical
topological order, then detectors sorted by name. Reals are printed with
17 significant digits so parse(emit(c)) == c exactly.
"""

from pathlib import Path

from src.core.config import FLOAT_SIGNIFICANT_DIGITS
from src.optics.circuit import Circuit
from src.optics.elements import (
    Attenuator,
    BeamSplitter,
    Element,
    HalfWavePlate,
    LabelUnitary,
    Merge,
    OamShift,
    PhaseShift,
    Sorter,
)
from src.optics.state import label_sort_key


def _real(x: float) -> str:
    return format(float(x), f".{FLOAT_SIGNIFICANT_DIGITS}g")


def _routes(table) -> str:
    items = sorted(table.items(), key=lambda kv: label_sort_key(kv[0]))
    return " ".join(f"{label}:{port}" for label, port in items)


def emit_element(element: Element) -> str:
    """One netlist statement for an element."""
    if isinstance(element, BeamSplitter):
        return (
            f"bs {element.convention.value} {_real(element.ratio)} "
            f"{element.port_a} {element.port_b} -> {element.port_c} {element.port_d}"
        )
    if isinstance(element, PhaseShift):
        return f"phase {element.port} {_real(element.phi)}"
    if isinstance(element, Attenuator):
        return f"atten {element.port} {_real(element.t)}"
    if isinstance(element, OamShift):
        return f"shift {element.port} {element.delta}"
    if isinstance(element, Sorter):
        return f"sorter {element.in_port} reject {element.reject} {{ {_routes(element.table)} }}"
    if isinstance(element, Merge):
        return f"merge {element.out_port} {{ {_routes(element.table)} }}"
    if isinstance(element, HalfWavePlate):
        return f"hwp {element.port} {element.orientation.value}"
    if isinstance(element, LabelUnitary):
        entries = " ".join(f"{_real(z.real)} {_real(z.imag)}" for row in element.matrix for z in row)
        l1, l2 = element.labels
        return f"lunitary {element.port} {l1} {l2} {entries}"
    raise TypeError(f"no netlist statement for {type(element).__name__}")


def emit(circuit: Circuit) -> str:
    """Canonical text for a circuit, LF line endings, trailing newline."""
    lines: list[str] = []
    if circuit.name:
        lines.append(f"# {circuit.name}")
    lines.extend(f"source {port}" for port in circuit.sources)
    lines.extend(emit_element(element) for element in circuit.elements)
    lines.extend(f"detect {name} {port}" for name, port in sorted(circuit.detectors.items()))
    return "\n".join(lines) + "\n"


def save_netlist(circuit: Circuit, path: Path | str) -> Path:
    """Write the canonical netlist, creating parent directories."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(emit(circuit), encoding="utf-8")
    return path

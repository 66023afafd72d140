"""
Netlist parser: text -> validated Circuit.

Syntax problems become NetlistSyntaxError and invalid circuits become
NetlistSemanticError, both with the line and column of the offending
statement. No other exception escapes `parse` for any input string.

Usage:
    from src.netlist.parser import parse

    circuit = parse("source in\\nbs hadamard 0.5 in aux -> c d\\ndetect C c\\ndetect D d\\n")
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional
import logging

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import LarkError, UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken, VisitError

from src.core.errors import CircuitError, NetlistError, NetlistSemanticError, NetlistSyntaxError, OamlabError
from src.netlist.grammar import NETLIST_GRAMMAR
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
from src.optics.state import Label, check_label, parse_label

logger = logging.getLogger(__name__)

_parser = Lark(NETLIST_GRAMMAR, parser="lalr", propagate_positions=True, maybe_placeholders=False)


@dataclass
class Statement:
    """One parsed line: `payload` is an Element, a source port, or (name, port)."""

    keyword: str
    payload: Any
    line: int
    column: int

    def ports(self) -> tuple[str, ...]:
        if isinstance(self.payload, Element):
            return tuple(self.payload.inputs) + tuple(self.payload.outputs)
        if self.keyword == "source":
            return (self.payload,)
        return (self.payload[1],)


def _semantic(meta: Any, build):
    """Run an element constructor, turning library errors into located diagnostics."""
    try:
        return build()
    except OamlabError as e:
        raise NetlistSemanticError(str(e), meta.line, meta.column) from e


@v_args(meta=True)
class _NetlistTransformer(Transformer):
    """Turns the parse tree into Statements."""

    def start(self, meta, children):
        return list(children)

    def number(self, meta, children):
        return float(children[0])

    def route(self, meta, children):
        label = _semantic(meta, lambda: check_label(parse_label(str(children[0]))))
        return (label, str(children[1]), meta.line, meta.column)

    def source(self, meta, children):
        return Statement("source", str(children[0]), meta.line, meta.column)

    def bs(self, meta, children):
        convention, ratio, a, b, c, d = children
        element = _semantic(meta, lambda: BeamSplitter(str(a), str(b), str(c), str(d), ratio, str(convention)))
        return Statement("bs", element, meta.line, meta.column)

    def phase(self, meta, children):
        port, phi = children
        return Statement("phase", _semantic(meta, lambda: PhaseShift(str(port), phi)), meta.line, meta.column)

    def atten(self, meta, children):
        port, t = children
        return Statement("atten", _semantic(meta, lambda: Attenuator(str(port), t)), meta.line, meta.column)

    def shift(self, meta, children):
        port, delta = children
        return Statement("shift", _semantic(meta, lambda: OamShift(str(port), int(delta))), meta.line, meta.column)

    def sorter(self, meta, children):
        in_port, reject, *routes = children
        table = self._table(meta, routes)
        element = _semantic(meta, lambda: Sorter(str(in_port), table, str(reject)))
        return Statement("sorter", element, meta.line, meta.column)

    def merge(self, meta, children):
        out_port, *routes = children
        table = self._table(meta, routes)
        element = _semantic(meta, lambda: Merge(str(out_port), table))
        return Statement("merge", element, meta.line, meta.column)

    def hwp(self, meta, children):
        port, orientation = children
        element = _semantic(meta, lambda: HalfWavePlate(str(port), str(orientation)))
        return Statement("hwp", element, meta.line, meta.column)

    def lunitary(self, meta, children):
        port, l1, l2, *values = children
        labels = _semantic(meta, lambda: (check_label(parse_label(str(l1))), check_label(parse_label(str(l2)))))
        m = (
            (complex(values[0], values[1]), complex(values[2], values[3])),
            (complex(values[4], values[5]), complex(values[6], values[7])),
        )
        element = _semantic(meta, lambda: LabelUnitary(str(port), labels, m))
        return Statement("lunitary", element, meta.line, meta.column)

    def detect(self, meta, children):
        name, port = children
        return Statement("detect", (str(name), str(port)), meta.line, meta.column)

    @staticmethod
    def _table(meta, routes) -> dict[Label, str]:
        table: dict[Label, str] = {}
        for label, port, line, column in routes:
            if label in table:
                raise NetlistSemanticError(f"label {label} routed twice", line, column)
            table[label] = port
        return table


def parse_statements(text: str) -> list[Statement]:
    """
    Parse netlist text into located statements without building the circuit.

    Raises:
        NetlistSyntaxError: If the text is outside the grammar
        NetlistSemanticError: If an element has invalid parameters
    """
    if not text.endswith("\n"):
        text += "\n"
    try:
        tree = _parser.parse(text)
    except UnexpectedInput as e:
        raise NetlistSyntaxError(_describe(e), e.line if e.line > 0 else None, e.column if e.column > 0 else None) from e
    except LarkError as e:
        raise NetlistSyntaxError(str(e)) from e

    try:
        return _NetlistTransformer().transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, NetlistError):
            raise e.orig_exc from None
        line = getattr(getattr(e.obj, "meta", None), "line", None)
        raise NetlistSemanticError(f"invalid statement: {e.orig_exc}", line) from e


def parse(text: str, name: str = "") -> Circuit:
    """
    Parse and validate a netlist.

    Raises:
        NetlistSyntaxError: Text outside the grammar
        NetlistSemanticError: Duplicate ports, cycles, unknown ports and bad parameters
    """
    statements = parse_statements(text)

    sources: list[str] = []
    elements: list[Element] = []
    element_lines: list[Statement] = []
    detectors: dict[str, str] = {}
    detector_lines: dict[str, Statement] = {}
    first_mention: dict[str, Statement] = {}

    for statement in statements:
        for port in statement.ports():
            first_mention.setdefault(port, statement)
        if statement.keyword == "source":
            if statement.payload in sources:
                raise NetlistSemanticError(f"source '{statement.payload}' declared twice", statement.line, statement.column)
            sources.append(statement.payload)
        elif statement.keyword == "detect":
            det_name, port = statement.payload
            if det_name in detectors:
                raise NetlistSemanticError(f"detector '{det_name}' declared twice", statement.line, statement.column)
            detectors[det_name] = port
            detector_lines[det_name] = statement
        else:
            elements.append(statement.payload)
            element_lines.append(statement)

    try:
        circuit = Circuit(sources, elements, detectors, name=name)
    except CircuitError as e:
        where = _locate(e, element_lines, detector_lines, first_mention)
        raise NetlistSemanticError(
            str(e), where.line if where else None, where.column if where else None
        ) from e
    except OamlabError as e:
        raise NetlistSemanticError(str(e)) from e

    logger.debug(f"Parsed netlist: {circuit}")
    return circuit


def load_netlist(path: Path | str) -> Circuit:
    """Read and parse a .onl file; the circuit is named after the file stem."""
    path = Path(path)
    return parse(path.read_text(encoding="utf-8"), name=path.stem)


def _locate(
    error: CircuitError,
    element_lines: list[Statement],
    detector_lines: dict[str, Statement],
    first_mention: dict[str, Statement],
) -> Optional[Statement]:
    if error.detector is not None and error.detector in detector_lines:
        return detector_lines[error.detector]
    if error.element_index is not None and error.element_index < len(element_lines):
        return element_lines[error.element_index]
    if error.port is not None:
        return first_mention.get(error.port)
    return None


def _describe(error: UnexpectedInput) -> str:
    if isinstance(error, UnexpectedToken):
        token: Token = error.token
        if token.type == "$END":
            return "unexpected end of input"
        expected = ", ".join(sorted(error.expected)[:6])
        return f"unexpected {token.value!r}; expected one of {expected}"
    if isinstance(error, UnexpectedCharacters):
        return f"unexpected character {error.char!r}"
    if isinstance(error, UnexpectedEOF):
        return "unexpected end of input"
    return str(error)

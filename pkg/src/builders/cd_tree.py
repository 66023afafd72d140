"""
C/D detection tree over one or both parity chains of a sequence.

Layout for every sequence index n in the chosen chain(s):

    sorter in -> s{n}
    bs s{n} z{n} -> lo{n} hi{n}        50/50 spoke splitter
    shift lo{n} -v_n, shift hi{n} -v_n  both arms to label 0
    bs lo{n} hi{n-2} -> c{n} d{n}       pairs spokes two indices apart
    detect C_n c{n}, detect D_n d{n}

The C_n row is (F_n + F_{n-2})/2 and the D_n row (F_n - F_{n-2})/2, each of
weight 1/2. The lowest spokes' lo arms and the highest spokes' hi arms pair
with nothing and end on auxiliary detectors E_n.
"""

from enum import Enum
from typing import Any, Optional

from src.builders.base import BaseBuilder, BuildResult, int_param, sequence_param
from src.builders.verify import bra_check, ket
from src.core.config import EXACT_TOLERANCE, ORACLE_TOLERANCE
from src.core.errors import BuilderError
from src.measurement.statistics import probabilities
from src.models.report import VerificationCheck
from src.optics.circuit import Circuit, detector_projectors, source_basis
from src.optics.elements import BeamSplitter, Element, OamShift, Sorter
from src.optics.sequences import SequenceSpec, SequenceWindow, make_named_state


class ChainParity(str, Enum):
    EVEN = "even"
    ODD = "odd"
    BOTH = "both"

    @classmethod
    def parse(cls, value: "ChainParity | str") -> "ChainParity":
        if isinstance(value, ChainParity):
            return value
        text = str(value).lower().removesuffix("-index")
        try:
            return cls(text)
        except ValueError:
            raise BuilderError(f"parity must be even, odd or both, got {value!r}") from None


def chain_indices(
    window: SequenceWindow,
    parity: ChainParity | str,
    first_index: Optional[int] = None,
    last_index: Optional[int] = None,
) -> list[int]:
    """
    Sequence indices a tree is built over.

    Raises:
        BuilderError: If a chain has too few values
    """
    parity = ChainParity.parse(parity)
    lo = first_index if first_index is not None else min(window.indices, default=0)
    hi = last_index if last_index is not None else max(window.indices, default=-1)
    indices = [n for n, _ in window.restricted(lo, hi)]

    if parity == ChainParity.BOTH:
        for p in (0, 1):
            if len([n for n in indices if n % 2 == p]) < 2:
                raise BuilderError("a two-chain tree needs at least 2 values of each index parity")
        return indices

    chain = [n for n in indices if n % 2 == (0 if parity == ChainParity.EVEN else 1)]
    if len(chain) < 3:
        raise BuilderError(f"a {parity.value}-index tree needs at least 3 values, got {len(chain)}")
    return chain


def build_cd_tree(
    seq: SequenceSpec | SequenceWindow,
    parity: ChainParity | str = ChainParity.ODD,
    first_index: Optional[int] = None,
    last_index: Optional[int] = None,
    in_port: str = "in",
    prefix: str = "",
) -> Circuit:
    """
    Build the C/D detection tree.

    Args:
        seq: Sequence the spokes are taken from
        parity: Index parity of the chain, or both chains from one sorter
        first_index: Lowest sequence index to include
        last_index: Highest sequence index to include
        in_port: Source port feeding the sorter
        prefix: Prepended to every internal port name

    Raises:
        BuilderError: If a chain has fewer values than the tree needs
    """
    window = seq if isinstance(seq, SequenceWindow) else SequenceWindow(seq)
    indices = chain_indices(window, parity, first_index, last_index)
    present = set(indices)

    elements, detectors = cd_tree_elements(window, indices, in_port, prefix)
    for n in indices:
        if n - 2 not in present:
            detectors[f"E_{n}"] = f"{prefix}lo{n}"
        if n + 2 not in present:
            detectors[f"E_{n}"] = f"{prefix}hi{n}"
    return Circuit([in_port], elements, detectors, name=f"cd-tree-{ChainParity.parse(parity).value}")


def cd_tree_elements(
    window: SequenceWindow,
    indices: list[int],
    in_port: str,
    prefix: str = "",
) -> tuple[list[Element], dict[str, str]]:
    """Sorter, spoke splitters, shifters and pairing splitters with their C/D detectors."""
    present = set(indices)
    p = prefix
    elements: list[Element] = [
        Sorter(in_port, {window.value(n): f"{p}s{n}" for n in indices}, f"{p}discard")
    ]
    detectors: dict[str, str] = {}
    for n in indices:
        v = window.value(n)
        elements += [
            BeamSplitter(f"{p}s{n}", f"{p}z{n}", f"{p}lo{n}", f"{p}hi{n}"),
            OamShift(f"{p}lo{n}", -v),
            OamShift(f"{p}hi{n}", -v),
        ]
        if n - 2 in present:
            elements.append(BeamSplitter(f"{p}lo{n}", f"{p}hi{n - 2}", f"{p}c{n}", f"{p}d{n}"))
            detectors[f"C_{n}"] = f"{p}c{n}"
            detectors[f"D_{n}"] = f"{p}d{n}"
    return elements, detectors


class CDTreeBuilder(BaseBuilder):
    """
    C/D tree over a Fibonacci-type chain.

    Params:
        seq: SequenceSpec fields (dict) or a SequenceSpec
        parity: even, odd or both
        first_index / last_index: Optional index range
    """

    @property
    def name(self) -> str:
        return "cd-tree"

    @property
    def description(self) -> str:
        return "Sorter + 50/50 spokes paired two indices apart; detectors C_n, D_n"

    def build(self, **params: Any) -> BuildResult:
        seq = sequence_param(params.get("seq"))
        parity = ChainParity.parse(params.get("parity", ChainParity.ODD))
        first, last = int_param(params, "first_index"), int_param(params, "last_index")
        circuit = build_cd_tree(seq, parity, first, last)
        window = SequenceWindow(seq)
        indices = chain_indices(window, parity, first, last)
        self.logger.info(f"Built cd-tree over indices {indices[0]}..{indices[-1]} ({len(circuit)} elements)")
        return BuildResult(self.name, circuit, params, data={"window": window, "indices": indices})

    def checks(self, result: BuildResult) -> list[VerificationCheck]:
        window: SequenceWindow = result.data["window"]
        indices: list[int] = result.data["indices"]
        basis = source_basis(result.circuit, [window.value(n) for n in indices])
        projectors = detector_projectors(result.circuit, basis)
        present = set(indices)

        checks: list[VerificationCheck] = []
        for n in indices:
            if n - 2 not in present:
                continue
            pair = [window.value(n), window.value(n - 2)]
            checks += bra_check(projectors, f"C_{n}", ket(pair, [1, 1]), weight=0.5)
            checks += bra_check(projectors, f"D_{n}", ket(pair, [1, -1]), weight=0.5)

            # |S_{n-1}> never fires D_n and fires C_n half the time
            if window.has(n - 1):
                dist = probabilities(result.circuit, make_named_state("S", n - 1, window))
                checks.append(
                    VerificationCheck.measure(f"S_{n - 1} -> D_{n}", dist.probability(f"D_{n}"), EXACT_TOLERANCE)
                )
                checks.append(
                    VerificationCheck.measure(
                        f"S_{n - 1} -> C_{n}", abs(dist.probability(f"C_{n}") - 0.5), EXACT_TOLERANCE
                    )
                )

        for n in indices:
            if n - 2 in present and n + 2 in present:
                dist = probabilities(result.circuit, make_named_state("F", n, window))
                quarters = [f"C_{n}", f"D_{n}", f"C_{n + 2}", f"D_{n + 2}"]
                deviation = max(abs(dist.probability(name) - 0.25) for name in quarters)
                checks.append(VerificationCheck.measure(f"F_{n} quarters", deviation, ORACLE_TOLERANCE))
        return checks
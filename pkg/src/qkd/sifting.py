"""
Sifting rules: which trials yield key symbols, and the relation kept
symbols must satisfy.

An L detector L_k reports the eigenstate F_k; a C detector C_n reports the
superposition S_{n-1}. D-type and edge detectors never produce symbols, and
neither do outcomes whose index falls outside the source window.
Between the two parties' indices the source guarantees

    L/L: |a - b| = 1        L/D: |a - s| in {0, 2}        D/D: |s_A - s_B| in {1, 3}
"""

from abc import ABC, abstractmethod
from typing import Optional
import re

from src.models.protocol import Basis, SiftingRule

_INDEXED = re.compile(r"^([A-Z]+)_(-?\d+)$")

RELATIONS: dict[str, frozenset[int]] = {
    "LL": frozenset({1}),
    "LD": frozenset({0, 2}),
    "DL": frozenset({0, 2}),
    "DD": frozenset({1, 3}),
}


def outcome_index(basis: Basis, outcome: str) -> Optional[int]:
    """F index (L basis) or S index (D basis) an outcome reports, or None."""
    match = _INDEXED.match(outcome)
    if match is None:
        return None
    kind, index = match.group(1), int(match.group(2))
    if basis == Basis.L and kind == "L":
        return index
    if basis == Basis.D and kind == "C":
        return index - 1
    return None


def consistent(basis_pair: str, alice_index: int, bob_index: int) -> bool:
    """Whether two reported indices satisfy the source relation."""
    return abs(alice_index - bob_index) in RELATIONS[basis_pair]


class SiftingStrategy(ABC):
    """Decides which trials contribute key symbols."""

    @property
    @abstractmethod
    def rule(self) -> SiftingRule:
        pass

    @abstractmethod
    def keep(self, alice_basis: Basis, alice_outcome: str, bob_basis: Basis, bob_outcome: str) -> bool:
        pass


class CDetectorSifting(SiftingStrategy):
    """L/L always; any D side must have fired a C detector."""

    @property
    def rule(self) -> SiftingRule:
        return SiftingRule.C_DETECTOR

    def keep(self, alice_basis: Basis, alice_outcome: str, bob_basis: Basis, bob_outcome: str) -> bool:
        return (
            outcome_index(alice_basis, alice_outcome) is not None
            and outcome_index(bob_basis, bob_outcome) is not None
        )


class LOnlySifting(SiftingStrategy):
    """Only trials where both parties measured in L."""

    @property
    def rule(self) -> SiftingRule:
        return SiftingRule.L_ONLY

    def keep(self, alice_basis: Basis, alice_outcome: str, bob_basis: Basis, bob_outcome: str) -> bool:
        return (
            alice_basis == Basis.L
            and bob_basis == Basis.L
            and outcome_index(alice_basis, alice_outcome) is not None
            and outcome_index(bob_basis, bob_outcome) is not None
        )


def get_sifting(rule: SiftingRule | str) -> SiftingStrategy:
    rule = SiftingRule(rule)
    if rule == SiftingRule.L_ONLY:
        return LOnlySifting()
    return CDetectorSifting()


def window_symbol(index: int, m0: int, window: int) -> Optional[int]:
    """Window-relative symbol 0 .. window-1 for an F or S index, None outside the window."""
    symbol = index - m0
    return symbol if 0 <= symbol < window else None


def symbol_bits(symbol: int, window: int) -> Optional[str]:
    """
    Fixed-width bits for a symbol when the window size is a power of two.

    Raises:
        ValueError: If the symbol is outside 0 .. window-1
    """
    if not 0 <= symbol < window:
        raise ValueError(f"symbol {symbol} is outside the window 0..{window - 1}")
    if window < 2 or window & (window - 1):
        return None
    width = window.bit_length() - 1
    return format(symbol, f"0{width}b")

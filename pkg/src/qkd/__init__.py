"""
Fibonacci-pair key distribution: source, receivers, eavesdropper, sifting
and tamper detection.
"""

from src.qkd.eve import EveChannel, eve_channel
from src.qkd.protocol import (
    ProtocolResult,
    TamperReport,
    Verdict,
    detect_eavesdropper,
    run_protocol,
)
from src.qkd.sifting import get_sifting
from src.qkd.source import build_receivers, filter_retention, generate_pair

__all__ = [
    "EveChannel",
    "ProtocolResult",
    "TamperReport",
    "Verdict",
    "build_receivers",
    "detect_eavesdropper",
    "eve_channel",
    "filter_retention",
    "generate_pair",
    "get_sifting",
    "run_protocol",
]

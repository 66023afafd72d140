"""
Pydantic models for configuration, statistics and reports.

Centralizes all data validation schemas used across the application.
"""

from src.models.api import BuildRequest, SimulateRequest
from src.models.measurement import LOSS_OUTCOME, CountTable, Distribution
from src.models.protocol import (
    Basis,
    EveKind,
    EveModel,
    ProtocolConfig,
    SiftingRule,
    TrialRecord,
    WalkConfig,
    load_config,
)
from src.models.report import RunReport, VerificationCheck, VerificationReport, validate_report

__all__ = [
    "Basis",
    "BuildRequest",
    "CountTable",
    "Distribution",
    "EveKind",
    "EveModel",
    "LOSS_OUTCOME",
    "ProtocolConfig",
    "RunReport",
    "SiftingRule",
    "SimulateRequest",
    "TrialRecord",
    "VerificationCheck",
    "VerificationReport",
    "WalkConfig",
    "load_config",
    "validate_report",
]

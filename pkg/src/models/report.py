"""
Report models written by the CLI and returned by the HTTP API.

Every report carries `schema` so downstream tooling can detect format changes;
docs/report.schema.json is the published JSON schema for RunReport.
"""

from functools import lru_cache
from pathlib import Path
from typing import Any, Optional
import json

import jsonschema
from pydantic import BaseModel, ConfigDict, Field

from src.core.config import REPORT_SCHEMA_VERSION
from src.models.measurement import CountTable, Distribution


class VerificationCheck(BaseModel):
    """One builder self-test: a deviation measured against a tolerance."""

    name: str
    deviation: float
    tolerance: float
    passed: bool
    detail: str = ""

    @classmethod
    def measure(cls, name: str, deviation: float, tolerance: float, detail: str = "") -> "VerificationCheck":
        return cls(name=name, deviation=float(deviation), tolerance=tolerance, passed=deviation <= tolerance, detail=detail)


class VerificationReport(BaseModel):
    """Oracle verification of an apparatus."""

    apparatus: str
    checks: list[VerificationCheck] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def max_deviation(self) -> float:
        return max((check.deviation for check in self.checks), default=0.0)

    def summary(self) -> str:
        failed = [c.name for c in self.checks if not c.passed]
        status = "PASS" if not failed else f"FAIL ({', '.join(failed[:5])})"
        return f"{self.apparatus}: {len(self.checks)} checks, max deviation {self.max_deviation:.3g}, {status}"

    def to_dict(self) -> dict[str, Any]:
        data = self.model_dump()
        data["passed"] = self.passed
        data["max_deviation"] = self.max_deviation
        return data


class RunReport(BaseModel):
    """Result of one CLI command."""

    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(default=REPORT_SCHEMA_VERSION, alias="schema")
    command: str
    argv: list[str] = Field(default_factory=list)
    config: dict[str, Any] = Field(default_factory=dict)
    distribution: Optional[Distribution] = None
    counts: Optional[dict[str, CountTable]] = None
    verification: Optional[dict[str, Any]] = None
    results: dict[str, Any] = Field(default_factory=dict)
    wall_time: float = 0.0

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, exclude_none=True, indent=2)


REPORT_SCHEMA_PATH = Path(__file__).resolve().parents[2] / "docs" / "report.schema.json"


@lru_cache(maxsize=1)
def report_schema() -> dict[str, Any]:
    return json.loads(REPORT_SCHEMA_PATH.read_text(encoding="utf-8"))


def validate_report(report: RunReport | dict[str, Any]) -> dict[str, Any]:
    """
    Check a report against docs/report.schema.json.

    Returns:
        The report as a JSON-compatible dict

    Raises:
        jsonschema.ValidationError: If the report does not match the schema
    """
    data = json.loads(report.to_json()) if isinstance(report, RunReport) else report
    jsonschema.validate(data, report_schema())
    return data

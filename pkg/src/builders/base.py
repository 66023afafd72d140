"""
Base class for apparatus builders.

Each builder wraps a `build_*` function with a registry name, parameter
handling and an oracle self-test. The self-test always includes a netlist
round trip; subclasses add their own checks against target states.

Usage:
    from src.builders.base import BaseBuilder, BuildResult

    class MyBuilder(BaseBuilder):
        @property
        def name(self) -> str:
            return "my-apparatus"

        # ... implement description, build and checks
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Optional
import logging

from src.core.config import EXACT_TOLERANCE
from src.core.errors import BuilderError
from src.models.report import VerificationCheck, VerificationReport
from src.netlist.emitter import emit
from src.netlist.parser import parse
from src.optics.circuit import Circuit
from src.optics.sequences import SequenceSpec


@dataclass
class BuildResult:
    """A built apparatus: its primary circuit, companions and build parameters."""

    name: str
    circuit: Circuit
    params: dict[str, Any] = field(default_factory=dict)
    extra: dict[str, Circuit] = field(default_factory=dict)
    data: dict[str, Any] = field(default_factory=dict)

    def circuits(self) -> dict[str, Circuit]:
        return {"main": self.circuit, **self.extra}


def int_param(params: dict[str, Any], key: str, default: Optional[int] = None) -> Optional[int]:
    """
    Integer builder parameter, accepting ints and integer strings.

    Raises:
        BuilderError: If the value is not an integer
    """
    value = params.get(key)
    if value is None:
        return default
    if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
        raise BuilderError(f"parameter '{key}' must be an integer, got {value!r}")
    try:
        return int(value)
    except (TypeError, ValueError) as e:
        raise BuilderError(f"parameter '{key}' must be an integer, got {value!r}") from e


def bool_param(params: dict[str, Any], key: str, default: bool) -> bool:
    """
    Boolean builder parameter; strings true/false, yes/no, 1/0 are accepted.

    Raises:
        BuilderError: If the value is not a boolean
    """
    value = params.get(key)
    if value is None:
        return default
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("true", "yes", "1"):
        return True
    if text in ("false", "no", "0"):
        return False
    raise BuilderError(f"parameter '{key}' must be true or false, got {value!r}")


def sequence_param(value: Any) -> SequenceSpec:
    """
    SequenceSpec from a builder parameter: None for the default, a spec, or a dict.

    Raises:
        BuilderError: If the value does not validate
    """
    if value is None:
        return SequenceSpec()
    if isinstance(value, SequenceSpec):
        return value
    try:
        return SequenceSpec.model_validate(value)
    except ValueError as e:
        raise BuilderError(f"invalid sequence spec: {e}") from e


class BaseBuilder(ABC):
    """
    Base class for apparatus builders.

    Subclass this to expose a builder through the registry and CLI.
    """

    def __init__(self):
        self.logger = logging.getLogger(self.__class__.__name__)

    @property
    @abstractmethod
    def name(self) -> str:
        """Registry key, e.g. 'cd-tree'."""
        pass

    @property
    @abstractmethod
    def description(self) -> str:
        """One-line description shown by the CLI."""
        pass

    @abstractmethod
    def build(self, **params: Any) -> BuildResult:
        """
        Build the apparatus.

        Raises:
            BuilderError: If the parameters cannot produce the apparatus
        """
        pass

    @abstractmethod
    def checks(self, result: BuildResult) -> list[VerificationCheck]:
        """Oracle checks specific to this apparatus."""
        pass

    def verify(self, result: BuildResult) -> VerificationReport:
        """Run the round-trip check plus the apparatus checks."""
        report = VerificationReport(apparatus=self.name)
        for key, circuit in result.circuits().items():
            reparsed = parse(emit(circuit))
            report.checks.append(
                VerificationCheck.measure(
                    f"netlist round trip ({key})",
                    0.0 if reparsed == circuit else 1.0,
                    EXACT_TOLERANCE,
                )
            )
        report.checks.extend(self.checks(result))
        self.logger.info(report.summary())
        return report

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(name={self.name!r})"

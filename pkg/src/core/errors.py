"""
Exception hierarchy for oamlab.

Every error raised by the library derives from OamlabError. The CLI maps the
class-level exit_code onto the process exit status.
"""

from typing import Optional


class OamlabError(Exception):
    """Base class for all library errors."""

    exit_code = 1


# =============================================================================
# State algebra
# =============================================================================

class StateError(OamlabError):
    """A state violates its norm or label invariants."""


class LabelKindError(StateError):
    """An OAM operation met a polarization label, or the other way round."""


class SequenceError(OamlabError):
    """Invalid SequenceSpec or sequence lookup."""

    exit_code = 4


class IndexOutOfRangeError(SequenceError):
    """A sequence index falls outside the generated window."""


class SequenceOverflowError(SequenceError):
    """A sequence term exceeds the configured label bound."""


# =============================================================================
# Elements and circuits
# =============================================================================

class ElementError(OamlabError):
    """Invalid element parameters."""

    exit_code = 3


class PortNotFoundError(ElementError):
    """An element references a port the state does not know."""


class CircuitError(OamlabError):
    """
    Invalid circuit structure.

    Args:
        message: Human-readable description naming the offending port
        port: Port the problem was found on, if any
        element_index: Position of the offending element in the caller's list
        detector: Detector the problem was found on, if any
    """

    exit_code = 3

    def __init__(
        self,
        message: str,
        port: Optional[str] = None,
        element_index: Optional[int] = None,
        detector: Optional[str] = None,
    ):
        self.port = port
        self.element_index = element_index
        self.detector = detector
        super().__init__(message)


class TopologyError(CircuitError):
    """Cycle, duplicate port, or a port consumed twice."""


class UnknownPortError(CircuitError):
    """A statement references a port nothing produces."""


class UnknownSourceError(CircuitError):
    """Input amplitude sits on a path that is not a declared source."""


# =============================================================================
# Netlists
# =============================================================================

class NetlistError(OamlabError):
    """Base class for netlist diagnostics with a source location."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(self.__str__())

    def __str__(self) -> str:
        if self.line is None:
            return self.message
        return f"line {self.line}, column {self.column or 1}: {self.message}"


class NetlistSyntaxError(NetlistError):
    """Text outside the netlist grammar."""

    exit_code = 2


class NetlistSemanticError(NetlistError):
    """Grammatical text describing an invalid circuit."""

    exit_code = 3


# =============================================================================
# Builders, measurement, configuration
# =============================================================================

class BuilderError(OamlabError):
    """An apparatus cannot be built from the given parameters."""

    exit_code = 4


class MeasurementError(OamlabError):
    """Invalid statistics input."""


class DegenerateDistributionError(MeasurementError):
    """Fewer than two usable outcomes for a goodness-of-fit test."""


class InsufficientCountsError(MeasurementError):
    """Too few expected counts for the chi-square approximation."""


class ConfigError(OamlabError):
    """Invalid protocol or walk configuration."""

    exit_code = 5

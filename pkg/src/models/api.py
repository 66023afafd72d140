"""
Request bodies for the HTTP API.
"""

from typing import Any, Optional

from pydantic import BaseModel, Field

from src.optics.sequences import SequenceSpec


class SimulateRequest(BaseModel):
    """Simulate a netlist on one input state."""
    netlist: str
    input: str = Field(description='Named state such as "S:7" or amplitudes "3=1,5=-1"')
    seq: SequenceSpec = Field(default_factory=SequenceSpec)
    source: Optional[str] = None


class BuildRequest(BaseModel):
    """Build and verify an apparatus by registry name."""
    apparatus: str
    params: dict[str, Any] = Field(default_factory=dict)

"""
Protocol and walk configuration models.

Configurations arrive as JSON documents or CLI flags; both go through these
models so validation lives in one place.
"""

from enum import Enum
from pathlib import Path
from typing import Any, Optional
import json

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.core.config import (
    DEFAULT_ALPHA,
    DEFAULT_BASIS_PROBABILITY,
    DEFAULT_M0,
    DEFAULT_TRIALS,
    DEFAULT_WALK_STEPS,
    DEFAULT_WALK_TRAJECTORIES,
    DEFAULT_WINDOW,
)
from src.core.errors import ConfigError, OamlabError
from src.optics.sequences import SequenceSpec, SequenceWindow


class EveKind(str, Enum):
    NONE = "none"
    INTERCEPT_RESEND_L = "intercept_resend_L"
    INTERCEPT_RESEND_D = "intercept_resend_D"
    INTERCEPT_RESEND_RANDOM = "intercept_resend_random"


class EveModel(BaseModel):
    """Eavesdropper acting on Bob's photon."""

    kind: EveKind = EveKind.NONE
    probability: float = Field(default=1.0, ge=0.0, le=1.0)

    @property
    def active(self) -> bool:
        return self.kind != EveKind.NONE and self.probability > 0.0


class SiftingRule(str, Enum):
    """Which trials contribute key symbols."""

    C_DETECTOR = "c_detector"   # L/L always; any D side must fire a C detector
    L_ONLY = "l_only"           # only L/L trials


class ProtocolConfig(BaseModel):
    """
    Fibonacci protocol run.

    The source emits pairs over the window F_{m0} .. F_{m0+N-1}; `basis_probability`
    is the chance each party measures in L.
    """

    model_config = ConfigDict(populate_by_name=True)

    m0: int = Field(default=DEFAULT_M0, ge=2)
    window: int = Field(default=DEFAULT_WINDOW, ge=2, alias="N")
    seq: SequenceSpec = Field(default_factory=SequenceSpec)
    trials: int = Field(default=DEFAULT_TRIALS, ge=0)
    basis_probability: float = Field(default=DEFAULT_BASIS_PROBABILITY, ge=0.0, le=1.0)
    eve: EveModel = Field(default_factory=EveModel)
    seed: Optional[int] = None
    alpha: float = Field(default=DEFAULT_ALPHA, gt=0.0, le=1.0)
    family_correction: bool = True  # Sidak correction across the basis-pair tables
    symbol_error_rate: float = Field(default=0.0, ge=0.0, le=1.0)
    sifting: SiftingRule = SiftingRule.C_DETECTOR
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_window(self) -> "ProtocolConfig":
        try:
            window = SequenceWindow(self.seq)
        except OamlabError as e:
            raise ValueError(str(e)) from e
        missing = [n for n in range(self.m0, self.m0 + self.window) if not window.has(n)]
        if missing:
            raise ValueError(f"window indices {missing} are not generated by the sequence spec")
        return self

    @property
    def indices(self) -> list[int]:
        return list(range(self.m0, self.m0 + self.window))


class WalkConfig(BaseModel):
    """
    Coined walk on the Fibonacci chains.

    `sites` defaults to 2 * steps + 3 so a walker started in the middle never
    meets the reflecting ends.
    """

    sites: Optional[int] = Field(default=None, ge=2)
    parity: int = Field(default=1, ge=0, le=1)
    start_site: Optional[int] = None
    start_coin: str = Field(default="c", pattern="^[cd]$")
    steps: int = Field(default=DEFAULT_WALK_STEPS, ge=0)
    coherent: bool = True
    two_photon: bool = False
    trajectories: int = Field(default=DEFAULT_WALK_TRAJECTORIES, ge=1)
    seed: Optional[int] = None

    @property
    def site_count(self) -> int:
        return self.sites if self.sites is not None else 2 * self.steps + 3

    @property
    def start(self) -> int:
        return self.start_site if self.start_site is not None else self.site_count // 2

    @model_validator(mode="after")
    def _check_start(self) -> "WalkConfig":
        if self.start_site is not None and not (0 <= self.start_site < self.site_count):
            raise ValueError(f"start_site must lie in [0, {self.site_count})")
        return self


def load_config(model: type[BaseModel], source: Optional[Path | str] = None, **overrides: Any) -> Any:
    """
    Validate a JSON document (file path or inline JSON text) plus flag overrides.

    Raises:
        ConfigError: On unreadable files, bad JSON or validation failure
    """
    data: dict[str, Any] = {}
    if source is not None:
        text = str(source)
        try:
            if text.lstrip().startswith("{"):
                data = json.loads(text)
            else:
                data = json.loads(Path(text).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read configuration {text!r}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid {model.__name__}: {e}") from e


class Basis(str, Enum):
    L = "L"
    D = "D"


class TrialRecord(BaseModel):
    """One protocol trial as written to the transcript."""

    trial: int
    alice_basis: Basis
    bob_basis: Basis
    alice_outcome: str
    bob_outcome: str
    kept: bool = False
    alice_symbol: Optional[int] = None
    bob_symbol: Optional[int] = None
    eve_outcome: Optional[str] = None

    @property
    def basis_pair(self) -> str:
        return f"{self.alice_basis.value}{self.bob_basis.value}"

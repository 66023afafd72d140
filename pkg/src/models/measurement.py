"""
Detector statistics models: outcome distributions and count tables.
"""

from typing import Mapping

from pydantic import BaseModel, Field, model_validator

from src.core.config import DISTRIBUTION_TOLERANCE, LOSS_OUTCOME


class Distribution(BaseModel):
    """Probability per detector outcome plus the residual loss probability."""

    probabilities: dict[str, float]
    loss: float = 0.0

    @model_validator(mode="after")
    def _check_total(self) -> "Distribution":
        if LOSS_OUTCOME in self.probabilities:
            raise ValueError(f"'{LOSS_OUTCOME}' is reserved for undetected photons")
        negative = [name for name, p in self.probabilities.items() if p < -DISTRIBUTION_TOLERANCE]
        if negative or self.loss < -DISTRIBUTION_TOLERANCE:
            raise ValueError(f"negative probabilities: {negative or ['loss']}")
        total = sum(self.probabilities.values()) + self.loss
        if abs(total - 1.0) > DISTRIBUTION_TOLERANCE:
            raise ValueError(f"probabilities and loss sum to {total:.12g}, not 1")
        return self

    @classmethod
    def from_weights(cls, weights: Mapping[str, float]) -> "Distribution":
        """Outcome weights from a unit-norm input; whatever is missing becomes loss."""
        probabilities = {name: max(0.0, float(w)) for name, w in sorted(weights.items())}
        loss = 1.0 - sum(probabilities.values())
        if abs(loss) < DISTRIBUTION_TOLERANCE:
            loss = 0.0
        return cls(probabilities=probabilities, loss=loss)

    def probability(self, outcome: str) -> float:
        if outcome == LOSS_OUTCOME:
            return self.loss
        return self.probabilities.get(outcome, 0.0)

    def outcomes(self) -> list[str]:
        return sorted(self.probabilities)

    def detected(self) -> float:
        return sum(self.probabilities.values())

    def postselected(self) -> "Distribution":
        """Renormalized on detection."""
        total = self.detected()
        if total <= 0.0:
            raise ValueError("nothing is detected")
        return Distribution(probabilities={k: v / total for k, v in self.probabilities.items()}, loss=0.0)


class CountTable(BaseModel):
    """Observed counts per outcome over a number of trials; losses are kept apart."""

    counts: dict[str, int] = Field(default_factory=dict)
    lost: int = Field(default=0, ge=0)
    trials: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_counts(self) -> "CountTable":
        if any(c < 0 for c in self.counts.values()):
            raise ValueError("counts must be non-negative")
        if sum(self.counts.values()) + self.lost > self.trials:
            raise ValueError(
                f"{sum(self.counts.values())} counts and {self.lost} losses exceed {self.trials} trials"
            )
        return self

    def count(self, outcome: str) -> int:
        if outcome == LOSS_OUTCOME:
            return self.lost
        return self.counts.get(outcome, 0)

    def frequencies(self) -> dict[str, float]:
        if self.trials == 0:
            return {}
        return {name: c / self.trials for name, c in sorted(self.counts.items())}

    def __add__(self, other: "CountTable") -> "CountTable":
        merged = dict(self.counts)
        for name, c in other.counts.items():
            merged[name] = merged.get(name, 0) + c
        return CountTable(counts=merged, lost=self.lost + other.lost, trials=self.trials + other.trials)

"""
Intercept-resend eavesdropper on Bob's photon.

Eve measures the photon with one of the protocol's own receivers and sends
Bob a fresh photon in the state her detector indicated:

    L_k -> F_k        C_n -> S_{n-1}        D_n, E_n -> F_n

Alice's photon is left in the state conditioned on Eve's result.
"""

from dataclasses import dataclass
from typing import Optional
import logging
import re

import numpy as np

from src.core.errors import StateError
from src.models.protocol import Basis, EveKind, EveModel
from src.optics.sequences import make_named_state
from src.optics.state import PureState, TwoPhotonState
from src.qkd.source import SOURCE_PORT, Receivers

BOB = 1

_DETECTOR = re.compile(r"^([A-Z]+)_(-?\d+)$")


@dataclass(frozen=True)
class Interception:
    """One possible result of Eve's measurement."""

    outcome: str
    probability: float
    joint: TwoPhotonState


def resend_state(detector: str, receivers: Receivers) -> PureState:
    """
    The state Eve prepares after `detector` fired.

    Raises:
        StateError: For a detector name with no resend rule
    """
    match = _DETECTOR.match(detector)
    if match is None:
        raise StateError(f"no resend rule for detector '{detector}'")
    kind, index = match.group(1), int(match.group(2))
    if kind == "C":
        return make_named_state("S", index - 1, receivers.window, SOURCE_PORT)
    if kind in ("L", "D", "E"):
        return make_named_state("F", index, receivers.window, SOURCE_PORT)
    raise StateError(f"no resend rule for detector '{detector}'")


def interceptions(state: TwoPhotonState, basis: Basis, receivers: Receivers) -> list[Interception]:
    """Every outcome of Eve measuring Bob's photon in `basis`, with the state she leaves."""
    out: list[Interception] = []
    for name, projector in sorted(receivers.projectors[basis].items()):
        for label, row in projector.rows.items():
            functional = {mode: complex(row[j]) for j, mode in enumerate(projector.input_basis)}
            alice = state.conditional(BOB, functional)
            p = alice.norm2()
            if p <= 0.0:
                continue
            outcome = name if len(projector.rows) == 1 else f"{name}:{label}"
            joint = TwoPhotonState.product(alice.normalized(), resend_state(name, receivers))
            out.append(Interception(outcome, p, joint))
    return out


class EveChannel:
    """
    Eve acting on a fixed source state; interception tables are computed once
    per basis.

    Usage:
        channel = EveChannel(config.eve, generate_pair(config), receivers)
        joint, outcome = channel.apply(rng.random(3))
    """

    def __init__(self, model: EveModel, state: TwoPhotonState, receivers: Receivers):
        self.model = model
        self.state = state
        self.receivers = receivers
        self._tables: dict[Basis, tuple[list[Interception], np.ndarray]] = {}
        self.logger = logging.getLogger(self.__class__.__name__)

    def table(self, basis: Basis) -> tuple[list[Interception], np.ndarray]:
        if basis not in self._tables:
            options = interceptions(self.state, basis, self.receivers)
            cumulative = np.cumsum([o.probability for o in options])
            self._tables[basis] = (options, cumulative)
            self.logger.debug(f"Eve {basis.value} table: {len(options)} outcomes, total {cumulative[-1]:.12g}")
        return self._tables[basis]

    def basis_for(self, u: float) -> Basis:
        if self.model.kind == EveKind.INTERCEPT_RESEND_L:
            return Basis.L
        if self.model.kind == EveKind.INTERCEPT_RESEND_D:
            return Basis.D
        return Basis.L if u < 0.5 else Basis.D

    def apply(self, draws: np.ndarray) -> tuple[Optional[TwoPhotonState], Optional[str]]:
        """
        Run the channel with three uniform draws (intercept, basis, outcome).

        Returns:
            (joint state, Eve's outcome). The state is unchanged and the
            outcome None when Eve does not intercept; the state is None when
            Eve's measurement loses the photon.
        """
        if not self.model.active or draws[0] >= self.model.probability:
            return self.state, None
        options, cumulative = self.table(self.basis_for(draws[1]))
        i = int(np.searchsorted(cumulative, draws[2], side="right"))
        if i >= len(options):
            return None, "loss"
        return options[i].joint, options[i].outcome


def eve_channel(
    model: EveModel,
    state: TwoPhotonState,
    rng: np.random.Generator,
    receivers: Receivers,
) -> TwoPhotonState:
    """
    Apply the eavesdropper once.

    With probability model.probability Eve measures Bob's photon and resends;
    otherwise the state passes unchanged. A photon Eve loses comes back as
    the vacuum.
    """
    joint, _ = EveChannel(model, state, receivers).apply(rng.random(3))
    return joint if joint is not None else TwoPhotonState()


__all__ = ["EveChannel", "Interception", "eve_channel", "interceptions", "resend_state"]

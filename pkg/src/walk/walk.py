"""
Coined quantum walk along the Fibonacci chains.

Each site of a chain holds the label F_n, and the walker's coin is the pair
of paths "c" and "d" carrying it. One stage sorts both coin paths by label,
mixes each site's c and d arms on a 50/50 splitter (the C/D interferometer),
shifts the C arm one site down and the D arm one site up, and merges the arms
back onto the coin paths. At the chain ends the unpaired arm stays on its
site with the coin flipped, which keeps the stage unitary.

Usage:
    from src.walk.walk import QuantumWalk, run_walk

    walk = QuantumWalk.for_chain(sites=43, parity=1)
    result = run_walk(walk, walk.start_state(21), steps=20, measure_each=False)
    result.variance()
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence
import logging

import numpy as np

from src.core.config import DEFAULT_SEED, DEFAULT_WALK_TRAJECTORIES, WALK_VALUE_LIMIT
from src.core.errors import ConfigError, StateError
from src.measurement.statistics import stream
from src.models.measurement import Distribution
from src.optics.circuit import Circuit, propagate, simulate
from src.optics.elements import BeamSplitter, Element, Merge, OamShift, Sorter
from src.optics.sequences import SequenceSpec, SequenceWindow
from src.optics.state import Mode, PureState, TwoPhotonState

logger = logging.getLogger(__name__)

COINS = ("c", "d")
STAGE_OUTPUTS = {"cn": "c", "dn": "d"}


@dataclass(frozen=True)
class WalkSite:
    """One place on a chain: sequence index, OAM label and position along the chain."""

    index: int
    value: int
    position: int
    parity: int


def walk_window(spec: Optional[SequenceSpec] = None) -> SequenceWindow:
    """Fibonacci window wide enough for long walks."""
    spec = spec or SequenceSpec(range=(1, WALK_VALUE_LIMIT), label_bound=WALK_VALUE_LIMIT)
    return SequenceWindow(spec)


def build_chain(window: SequenceWindow, parity: int, sites: int) -> list[WalkSite]:
    """
    The first `sites` members of one parity chain.

    Raises:
        ConfigError: If the window holds fewer sites of that parity
    """
    indices = window.chain(parity)
    if len(indices) < sites:
        raise ConfigError(f"the sequence holds only {len(indices)} sites of parity {parity}, need {sites}")
    return [WalkSite(n, window.value(n), j, parity) for j, n in enumerate(indices[:sites])]


def build_walk_stage(chains: Sequence[Sequence[WalkSite]]) -> Circuit:
    """
    One walk stage over one or more chains.

    Sources "c" and "d"; outputs "cn" and "dn" carry the same label set.

    Raises:
        ConfigError: If a chain has fewer than two sites
    """
    sites = [site for chain in chains for site in chain]
    elements: list[Element] = [
        Sorter("c", {s.value: f"c{s.index}" for s in sites}, "cdiscard"),
        Sorter("d", {s.value: f"d{s.index}" for s in sites}, "ddiscard"),
    ]
    merge_c: dict[int, str] = {}
    merge_d: dict[int, str] = {}

    for chain in chains:
        if len(chain) < 2:
            raise ConfigError("a walk chain needs at least two sites")
        for j, site in enumerate(chain):
            n = site.index
            elements.append(BeamSplitter(f"c{n}", f"d{n}", f"lo{n}", f"hi{n}"))
            if j > 0:
                below = chain[j - 1]
                elements.append(OamShift(f"lo{n}", below.value - site.value, bound=WALK_VALUE_LIMIT))
                merge_c[below.value] = f"lo{n}"
            else:
                merge_d[site.value] = f"lo{n}"  # reflect
            if j < len(chain) - 1:
                above = chain[j + 1]
                elements.append(OamShift(f"hi{n}", above.value - site.value, bound=WALK_VALUE_LIMIT))
                merge_d[above.value] = f"hi{n}"
            else:
                merge_c[site.value] = f"hi{n}"  # reflect

    elements.append(Merge("cn", merge_c))
    elements.append(Merge("dn", merge_d))
    return Circuit(list(COINS), elements, name="walk-stage")


@dataclass
class WalkState:
    """Walker amplitudes on the coin paths plus the number of steps taken."""

    state: PureState
    step: int = 0


def without_detectors(circuit: Circuit) -> Circuit:
    """The same optics with every detector removed, so outputs stay open."""
    return Circuit(circuit.sources, circuit.elements, name=circuit.name)


def walk_step(state: WalkState, stage: Circuit) -> WalkState:
    """
    One coherent application of a stage; no measurement.

    Walk stages hand their outputs back onto the coin paths. Any other
    detector-free stage, such as a C/D tree, leaves the state on its output
    ports.

    Raises:
        UnknownSourceError: If amplitude sits off the stage's sources
    """
    out = simulate(stage, state.state)
    if set(STAGE_OUTPUTS) <= stage.ports:
        out = out.moved(STAGE_OUTPUTS)
    return WalkState(out, state.step + 1)


class QuantumWalk:
    """
    A stage together with its dense one-step matrix over the coin-site basis.

    Basis order is coin-major: all "c" sites, then all "d" sites.
    """

    def __init__(self, chains: Sequence[Sequence[WalkSite]]):
        self.chains = [list(chain) for chain in chains]
        self.sites: list[WalkSite] = [site for chain in self.chains for site in chain]
        self.stage = build_walk_stage(self.chains)
        self.basis: list[Mode] = [Mode(coin, s.value) for coin in COINS for s in self.sites]
        self._slot = {mode: i for i, mode in enumerate(self.basis)}
        self._by_index = {s.index: i for i, s in enumerate(self.sites)}
        self.positions = np.array([s.position for s in self.sites], dtype=float)
        self.unitary = self._stage_matrix()
        self.logger = logging.getLogger(self.__class__.__name__)
        self.logger.debug(f"Walk over {len(self.sites)} sites in {len(self.chains)} chain(s)")

    @classmethod
    def for_chain(cls, sites: int, parity: int = 1, window: Optional[SequenceWindow] = None) -> "QuantumWalk":
        return cls([build_chain(window or walk_window(), parity, sites)])

    @classmethod
    def for_both_chains(cls, sites: int, window: Optional[SequenceWindow] = None) -> "QuantumWalk":
        window = window or walk_window()
        return cls([build_chain(window, 1, sites), build_chain(window, 0, sites)])

    def _stage_matrix(self) -> np.ndarray:
        u = np.zeros((len(self.basis), len(self.basis)), dtype=complex)
        for j, mode in enumerate(self.basis):
            image = propagate(self.stage, mode).moved(STAGE_OUTPUTS)
            for target, amp in image.items():
                i = self._slot.get(target)
                if i is not None:
                    u[i, j] = amp
        return u

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def site(self, index: int) -> WalkSite:
        """Site holding sequence index `index`."""
        try:
            return self.sites[self._by_index[index]]
        except KeyError:
            raise StateError(f"index {index} is not on the walk") from None

    def start_state(self, position: int, coin: str = "c", chain: int = 0) -> WalkState:
        site = self.chains[chain][position]
        return WalkState(PureState.basis(coin, site.value))

    def to_vector(self, state: PureState) -> np.ndarray:
        outside = [m for m, _ in state.items() if m not in self._slot]
        if outside:
            raise StateError(f"modes {outside[:3]} are not walk modes")
        return state.to_vector(self.basis)

    def site_probabilities(self, vector: np.ndarray) -> np.ndarray:
        """Position marginal of a coin-site vector (probabilities or amplitudes)."""
        p = np.abs(vector) ** 2 if np.iscomplexobj(vector) else vector
        n = self.n_sites
        return p[:n] + p[n:]

    def transition_matrix(self) -> np.ndarray:
        """Markov matrix of the walk measured on the coin-site basis every step."""
        return np.abs(self.unitary) ** 2

    def coherent(self, start: WalkState, steps: int) -> np.ndarray:
        psi = self.to_vector(start.state)
        out = [self.site_probabilities(psi)]
        for _ in range(steps):
            psi = self.unitary @ psi
            out.append(self.site_probabilities(psi))
        return np.array(out)

    def markov(self, start: WalkState, steps: int) -> np.ndarray:
        """Exact position distributions of the measured walk."""
        p = np.abs(self.to_vector(start.state)) ** 2
        p = p / p.sum()
        t = self.transition_matrix()
        out = [self.site_probabilities(p)]
        for _ in range(steps):
            p = t @ p
            out.append(self.site_probabilities(p))
        return np.array(out)

    def measured(self, start: WalkState, steps: int, trajectories: int, seed: int) -> np.ndarray:
        """
        Empirical position distributions of `trajectories` walkers measured
        after every step. Step k draws from random stream k.
        """
        p0 = np.abs(self.to_vector(start.state)) ** 2
        cumulative0 = np.cumsum(p0 / p0.sum())
        cumulative = np.cumsum(self.transition_matrix(), axis=0)
        cumulative[-1, :] = np.maximum(cumulative[-1, :], 1.0)

        n = self.n_sites
        current = np.searchsorted(cumulative0, stream(seed, 0).random(trajectories), side="right")
        current = np.minimum(current, len(self.basis) - 1)
        out = [np.bincount(current % n, minlength=n) / trajectories]
        for step in range(1, steps + 1):
            u = stream(seed, step).random(trajectories)
            current = (u[:, None] >= cumulative[:, current].T).sum(axis=1)
            out.append(np.bincount(current % n, minlength=n) / trajectories)
        return np.array(out)


@dataclass
class WalkResult:
    """Position distribution after every step, step 0 included."""

    sites: list[WalkSite]
    probabilities: np.ndarray
    coherent: bool
    trajectories: Optional[int] = None
    seed: Optional[int] = None

    @property
    def steps(self) -> int:
        return len(self.probabilities) - 1

    def _positions(self) -> np.ndarray:
        return np.array([s.position for s in self.sites], dtype=float)

    def mean(self) -> np.ndarray:
        return self.probabilities @ self._positions()

    def variance(self) -> np.ndarray:
        x = self._positions()
        return self.probabilities @ (x * x) - self.mean() ** 2

    def distribution(self, step: int) -> Distribution:
        """Position distribution of one step keyed F_<index>."""
        return Distribution.from_weights(
            {f"F_{s.index}": float(p) for s, p in zip(self.sites, self.probabilities[step])}
        )

    def csv_rows(self) -> list[tuple[int, int, float]]:
        """(step, position, probability) for every nonzero entry."""
        return [
            (step, site.position, float(p))
            for step, row in enumerate(self.probabilities)
            for site, p in zip(self.sites, row)
            if p > 0.0
        ]


def run_walk(
    walk: QuantumWalk,
    start: WalkState,
    steps: int,
    measure_each: bool,
    trajectories: int = DEFAULT_WALK_TRAJECTORIES,
    seed: int = DEFAULT_SEED,
) -> WalkResult:
    """
    Walk for `steps` stages.

    Coherent runs evolve the amplitudes and read positions out afterwards;
    measured runs sample `trajectories` walkers whose position is observed
    after every stage.
    """
    if steps < 0:
        raise ConfigError(f"steps must be non-negative, got {steps}")
    if measure_each:
        probabilities = walk.measured(start, steps, trajectories, seed)
        logger.info(f"Measured walk: {trajectories} trajectories, {steps} steps, seed {seed}")
        return WalkResult(walk.sites, probabilities, coherent=False, trajectories=trajectories, seed=seed)
    probabilities = walk.coherent(start, steps)
    logger.info(f"Coherent walk: {steps} steps over {walk.n_sites} sites")
    return WalkResult(walk.sites, probabilities, coherent=True)


def variance_slope(variances: np.ndarray) -> float:
    """Least-squares growth of the variance per step."""
    steps = np.arange(len(variances), dtype=float)
    return float(np.polyfit(steps, variances, 1)[0])


# =============================================================================
# Two photons
# =============================================================================

@dataclass
class TwoPhotonWalkResult:
    """Joint position distribution per step, indexed [step, site A, site B]."""

    sites: list[WalkSite]
    joint: np.ndarray
    marginals: tuple[np.ndarray, np.ndarray] = field(init=False)

    def __post_init__(self) -> None:
        self.marginals = (self.joint.sum(axis=2), self.joint.sum(axis=1))

    def factorization_defect(self, step: int) -> float:
        """max |P(a, b) - P(a) P(b)| at one step."""
        a, b = self.marginals[0][step], self.marginals[1][step]
        return float(np.max(np.abs(self.joint[step] - np.outer(a, b))))

    def csv_rows(self) -> list[tuple[int, int, int, float]]:
        """(step, index A, index B, probability) for every nonzero entry."""
        rows = []
        for step, table in enumerate(self.joint):
            for i, j in zip(*np.nonzero(table)):
                rows.append((step, self.sites[i].index, self.sites[j].index, float(table[i, j])))
        return rows


def pair_start(walk: QuantumWalk, index: int, coin: str = "c") -> TwoPhotonState:
    """(|F_n>_A |F_{n-1}>_B + |F_{n-1}>_A |F_n>_B)/sqrt(2) on one coin path."""
    upper, lower = walk.site(index).value, walk.site(index - 1).value
    r = 1.0 / np.sqrt(2.0)
    return TwoPhotonState({
        (Mode(coin, upper), Mode(coin, lower)): r,
        (Mode(coin, lower), Mode(coin, upper)): r,
    })


def run_two_photon_walk(walk: QuantumWalk, start: TwoPhotonState, steps: int) -> TwoPhotonWalkResult:
    """Both photons pass through their own copy of the stage every step."""
    start.validate()
    slot = {mode: i for i, mode in enumerate(walk.basis)}
    psi = np.zeros((len(walk.basis), len(walk.basis)), dtype=complex)
    for (ma, mb), amp in start.items():
        if ma not in slot or mb not in slot:
            raise StateError(f"pair mode ({ma}, {mb}) is not on the walk")
        psi[slot[ma], slot[mb]] = amp

    n = walk.n_sites
    u = walk.unitary
    frames = []
    for step in range(steps + 1):
        if step:
            psi = u @ psi @ u.T
        p = np.abs(psi) ** 2
        frames.append(p[:n, :n] + p[:n, n:] + p[n:, :n] + p[n:, n:])
    logger.info(f"Two-photon walk: {steps} steps over {n} sites")
    return TwoPhotonWalkResult(walk.sites, np.array(frames))

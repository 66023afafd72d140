"""
Detector statistics: outcome distributions, seeded sampling, two-photon
coincidences and Pearson goodness-of-fit.

Sampling is reproducible: trials are drawn in blocks of SAMPLE_BLOCK_SIZE and
block b draws from default_rng(SeedSequence(seed, spawn_key=(b,))), so the
table for a seed does not depend on how the work is scheduled.
"""

from typing import Mapping, Optional
import logging

import numpy as np
from scipy import stats

from src.core.config import MIN_EXPECTED_COUNT, SAMPLE_BLOCK_SIZE
from src.core.errors import DegenerateDistributionError, InsufficientCountsError, MeasurementError
from src.models.measurement import LOSS_OUTCOME, CountTable, Distribution
from src.optics.circuit import Circuit, propagate, simulate
from src.optics.state import PureState, TwoPhotonState

logger = logging.getLogger(__name__)

COINCIDENCE_SEPARATOR = "|"


def stream(seed: int, index: int) -> np.random.Generator:
    """Independent random stream number `index` of a seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def detector_weights(circuit: Circuit, output: PureState) -> dict[str, float]:
    """Squared norm arriving at each detector's port."""
    return {name: output.path_norm2(port) for name, port in sorted(circuit.detectors.items())}


def probabilities(circuit: Circuit, state: PureState) -> Distribution:
    """
    Detector probabilities for one input state.

    Each detector fires with the total squared amplitude on its port, summed
    over labels; whatever reaches no detector is loss.

    Raises:
        UnknownSourceError: If the input has amplitude off the sources
        StateError: If the input's squared norm exceeds 1
    """
    return Distribution.from_weights(detector_weights(circuit, simulate(circuit, state)))


def sample(dist: Distribution, seed: int, n: int) -> CountTable:
    """
    Draw n trials from a distribution, loss included as an outcome.

    Usage:
        counts = sample(probabilities(circuit, psi), seed=7, n=10_000)
    """
    if n < 0:
        raise MeasurementError(f"trial count must be non-negative, got {n}")
    outcomes = dist.outcomes()
    p = np.array([dist.probability(o) for o in outcomes] + [dist.loss], dtype=float)
    p = np.clip(p, 0.0, None)
    p /= p.sum()

    totals = np.zeros(len(p), dtype=np.int64)
    for block, start in enumerate(range(0, n, SAMPLE_BLOCK_SIZE)):
        size = min(SAMPLE_BLOCK_SIZE, n - start)
        totals += stream(seed, block).multinomial(size, p)

    counts = {o: int(c) for o, c in zip(outcomes, totals[:-1]) if c > 0}
    return CountTable(counts=counts, lost=int(totals[-1]), trials=n)


def coincidence_key(detector_a: str, detector_b: str) -> str:
    return f"{detector_a}{COINCIDENCE_SEPARATOR}{detector_b}"


def split_coincidence_key(key: str) -> tuple[str, str]:
    a, _, b = key.partition(COINCIDENCE_SEPARATOR)
    return a, b


def evolve_pair(circuit_a: Circuit, circuit_b: Circuit, joint: TwoPhotonState) -> TwoPhotonState:
    """
    Apply circuit_a to photon A and circuit_b to photon B by linearity.

    Raises:
        UnknownSourceError: If a photon has amplitude off its circuit's sources
    """
    evolved = joint.apply_local(0, lambda mode: propagate(circuit_a, mode))
    return evolved.apply_local(1, lambda mode: propagate(circuit_b, mode))


def coincidence_probabilities(circuit_a: Circuit, circuit_b: Circuit, joint: TwoPhotonState) -> Distribution:
    """
    Joint detector distribution for a photon pair, keyed "dA|dB".

    Any pair in which either photon is lost counts as loss.
    """
    joint.validate()
    evolved = evolve_pair(circuit_a, circuit_b, joint)
    detector_a = {port: name for name, port in circuit_a.detectors.items()}
    detector_b = {port: name for name, port in circuit_b.detectors.items()}

    weights = {
        coincidence_key(a, b): 0.0 for a in sorted(circuit_a.detectors) for b in sorted(circuit_b.detectors)
    }
    for (mode_a, mode_b), amp in evolved.items():
        a = detector_a.get(mode_a.path)
        b = detector_b.get(mode_b.path)
        if a is not None and b is not None:
            weights[coincidence_key(a, b)] += abs(amp) ** 2
    return Distribution.from_weights(weights)


def marginal(dist: Distribution, slot: int) -> dict[str, float]:
    """Single-side detector probabilities of a coincidence distribution."""
    out: dict[str, float] = {}
    for key, p in dist.probabilities.items():
        name = split_coincidence_key(key)[slot]
        out[name] = out.get(name, 0.0) + p
    return out


def chi_square(
    observed: CountTable,
    expected: Distribution,
    min_expected: float = MIN_EXPECTED_COUNT,
) -> tuple[float, int]:
    """
    Pearson statistic of observed counts against a distribution.

    Cells with expected count below `min_expected` are pooled into one cell;
    a pool still below the threshold is merged into the smallest regular
    cell. Loss is a cell like any other.

    Returns:
        (statistic, degrees of freedom) with dof = cells - 1

    Raises:
        MeasurementError: If the table has no trials or unknown outcomes
        DegenerateDistributionError: If fewer than two cells remain
    """
    n = observed.trials
    if n <= 0:
        raise MeasurementError("chi-square needs at least one trial")
    unknown = [o for o in observed.counts if o not in expected.probabilities and observed.counts[o] > 0]
    if unknown:
        raise MeasurementError(f"observed outcomes {unknown} are not in the expected distribution")

    outcomes = expected.outcomes() + [LOSS_OUTCOME]
    cells = [(n * expected.probability(o), float(observed.count(o))) for o in outcomes]

    regular = [(e, o) for e, o in cells if e >= min_expected]
    small = [(e, o) for e, o in cells if e < min_expected]
    pool_e = sum(e for e, _ in small)
    pool_o = sum(o for _, o in small)

    if pool_e <= 0.0 and pool_o > 0:
        # an impossible outcome was observed
        return float("inf"), max(len(regular), 1)
    if pool_e > 0.0:
        if pool_e >= min_expected or not regular:
            regular.append((pool_e, pool_o))
        else:
            i = min(range(len(regular)), key=lambda k: regular[k][0])
            e, o = regular[i]
            regular[i] = (e + pool_e, o + pool_o)

    if len(regular) < 2:
        raise DegenerateDistributionError(
            f"only {len(regular)} usable cell(s) for a goodness-of-fit test over {n} trials"
        )

    statistic = sum((o - e) ** 2 / e for e, o in regular)
    return float(statistic), len(regular) - 1


def chi_square_pvalue(statistic: float, dof: int) -> float:
    """Upper tail probability of the chi-square distribution."""
    if dof <= 0:
        raise DegenerateDistributionError(f"chi-square needs dof >= 1, got {dof}")
    return float(stats.chi2.sf(statistic, dof))


def chi_square_threshold(dof: int, alpha: float) -> float:
    """Critical value: statistics above it reject at level alpha."""
    if dof <= 0:
        raise DegenerateDistributionError(f"chi-square needs dof >= 1, got {dof}")
    return float(stats.chi2.isf(alpha, dof))


def require_counts(expected: Distribution, trials: int, min_expected: float = MIN_EXPECTED_COUNT) -> None:
    """
    Raises:
        InsufficientCountsError: If even pooled, no two cells reach min_expected
    """
    cells = sorted((trials * p for p in list(expected.probabilities.values()) + [expected.loss]), reverse=True)
    if len(cells) < 2 or cells[0] < min_expected or sum(cells[1:]) < min_expected:
        raise InsufficientCountsError(
            f"{trials} trials give too few expected counts for a chi-square test (need {min_expected:g} per cell)"
        )


def empirical(observed: CountTable) -> Optional[Distribution]:
    """Observed frequencies as a distribution, or None for an empty table."""
    if observed.trials == 0:
        return None
    return Distribution.from_weights(observed.frequencies())


def total_variation(a: Mapping[str, float], b: Mapping[str, float]) -> float:
    keys = set(a) | set(b)
    return 0.5 * sum(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys)

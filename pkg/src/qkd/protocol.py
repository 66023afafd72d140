"""
End-to-end protocol simulation and tamper detection.

Each trial draws from its own random stream, default_rng(SeedSequence(seed,
spawn_key=(trial,))), so a transcript depends only on the configuration and
seed, never on how trials are spread over worker threads.

Usage:
    from src.qkd.protocol import run_protocol, detect_eavesdropper

    result = run_protocol(ProtocolConfig(trials=10_000, seed=1))
    verdict = detect_eavesdropper(result.counts, result.expected, alpha=0.001)
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Optional
import logging
import threading
import time

import numpy as np
from pydantic import BaseModel, Field

from src.core.config import DEFAULT_SEED
from src.core.errors import DegenerateDistributionError, InsufficientCountsError
from src.measurement.statistics import (
    chi_square,
    chi_square_pvalue,
    chi_square_threshold,
    coincidence_key,
    coincidence_probabilities,
    marginal,
    require_counts,
    split_coincidence_key,
    stream,
)
from src.models.measurement import LOSS_OUTCOME, CountTable, Distribution
from src.models.protocol import Basis, ProtocolConfig, TrialRecord
from src.optics.state import TwoPhotonState
from src.qkd.eve import EveChannel
from src.qkd.sifting import consistent, get_sifting, outcome_index, symbol_bits, window_symbol
from src.qkd.source import Receivers, build_receivers, filter_retention, generate_pair

logger = logging.getLogger(__name__)

BASIS_PAIRS = ("LL", "LD", "DL", "DD")
DRAWS_PER_TRIAL = 8


def blend_symbol_errors(dist: Distribution, bob_detectors: list[str], rate: float) -> Distribution:
    """
    Coincidence distribution after Bob's detected outcome is replaced, with
    probability `rate`, by a uniformly random detector of his receiver.
    """
    if rate <= 0.0:
        return dist
    alice = marginal(dist, 0)
    weights: dict[str, float] = {}
    for key, p in dist.probabilities.items():
        a, _ = split_coincidence_key(key)
        weights[key] = (1.0 - rate) * p + rate * alice.get(a, 0.0) / len(bob_detectors)
    return Distribution(probabilities=weights, loss=dist.loss)


class _Sampler:
    """Cumulative table for drawing one outcome of a distribution."""

    def __init__(self, dist: Distribution):
        self.outcomes = dist.outcomes() + [LOSS_OUTCOME]
        self.cumulative = np.cumsum([dist.probability(o) for o in self.outcomes])

    def draw(self, u: float) -> str:
        i = int(np.searchsorted(self.cumulative, u * self.cumulative[-1], side="right"))
        return self.outcomes[min(i, len(self.outcomes) - 1)]


@dataclass
class ProtocolResult:
    """Transcript, keys and statistics of one protocol run."""

    config: ProtocolConfig
    seed: int
    transcript: list[TrialRecord]
    counts: dict[str, CountTable]
    expected: dict[str, Distribution]
    alice_key: list[int] = field(default_factory=list)
    bob_key: list[int] = field(default_factory=list)
    filter_retention: Fraction = Fraction(1)
    wall_time: float = 0.0

    @property
    def sifted(self) -> int:
        return len(self.alice_key)

    @property
    def agreement(self) -> Optional[float]:
        """Share of kept trials whose symbols satisfy the source relation."""
        kept = [r for r in self.transcript if r.kept]
        if not kept:
            return None
        good = sum(consistent(r.basis_pair, r.alice_symbol, r.bob_symbol) for r in kept)
        return good / len(kept)

    def key_bits(self, party: str = "alice") -> Optional[str]:
        """Key as a bit string when the window size is a power of two."""
        symbols = self.alice_key if party == "alice" else self.bob_key
        parts = [symbol_bits(s, self.config.window) for s in symbols]
        if any(p is None for p in parts):
            return None
        return "".join(parts)

    def summary(self) -> dict[str, Any]:
        trials = len(self.transcript)
        return {
            "trials": trials,
            "sifted": self.sifted,
            "sift_rate": self.sifted / trials if trials else 0.0,
            "key_agreement": self.agreement,
            "filter_retention": float(self.filter_retention),
            "filter_retention_fraction": str(self.filter_retention),
            "effective_rate": (self.sifted / trials if trials else 0.0) * float(self.filter_retention),
            "bits_per_symbol": (self.config.window.bit_length() - 1)
            if self.config.window & (self.config.window - 1) == 0
            else None,
        }


class ProtocolRunner:
    """
    Runs trials of one configuration; coincidence distributions are cached
    per (Eve outcome, basis pair) and shared between worker threads.
    """

    def __init__(self, config: ProtocolConfig, seed: Optional[int] = None):
        self.config = config
        self.seed = seed if seed is not None else (config.seed if config.seed is not None else DEFAULT_SEED)
        self.receivers: Receivers = build_receivers(config)
        self.source: TwoPhotonState = generate_pair(config)
        self.channel = EveChannel(config.eve, self.source, self.receivers)
        self.sifting = get_sifting(config.sifting)
        self._samplers: dict[tuple[Optional[str], Basis, Basis], _Sampler] = {}
        self._lock = threading.Lock()
        self.logger = logging.getLogger(self.__class__.__name__)

        if config.eve.active:
            for basis in (Basis.L, Basis.D):
                self.channel.table(basis)

    def expected(self) -> dict[str, Distribution]:
        """No-Eve coincidence distribution per basis pair, symbol errors included."""
        out: dict[str, Distribution] = {}
        for pair in BASIS_PAIRS:
            a, b = Basis(pair[0]), Basis(pair[1])
            dist = coincidence_probabilities(self.receivers.circuits[a], self.receivers.circuits[b], self.source)
            out[pair] = blend_symbol_errors(dist, self.receivers.detectors(b), self.config.symbol_error_rate)
        return out

    def _sampler(self, joint: TwoPhotonState, eve_outcome: Optional[str], a: Basis, b: Basis) -> _Sampler:
        key = (eve_outcome, a, b)
        with self._lock:
            sampler = self._samplers.get(key)
        if sampler is None:
            dist = coincidence_probabilities(self.receivers.circuits[a], self.receivers.circuits[b], joint)
            sampler = _Sampler(dist)
            with self._lock:
                sampler = self._samplers.setdefault(key, sampler)
        return sampler

    def trial(self, t: int) -> TrialRecord:
        u = stream(self.seed, t).random(DRAWS_PER_TRIAL)
        a = Basis.L if u[0] < self.config.basis_probability else Basis.D
        b = Basis.L if u[1] < self.config.basis_probability else Basis.D

        joint, eve_outcome = self.channel.apply(u[2:5])
        if joint is None:
            return TrialRecord(trial=t, alice_basis=a, bob_basis=b, alice_outcome=LOSS_OUTCOME,
                               bob_outcome=LOSS_OUTCOME, eve_outcome=eve_outcome)

        outcome = self._sampler(joint, eve_outcome, a, b).draw(u[5])
        if outcome == LOSS_OUTCOME:
            alice_out = bob_out = LOSS_OUTCOME
        else:
            alice_out, bob_out = split_coincidence_key(outcome)
            if u[6] < self.config.symbol_error_rate:
                detectors = self.receivers.detectors(b)
                bob_out = detectors[min(int(u[7] * len(detectors)), len(detectors) - 1)]

        record = TrialRecord(trial=t, alice_basis=a, bob_basis=b, alice_outcome=alice_out,
                             bob_outcome=bob_out, eve_outcome=eve_outcome)
        if alice_out != LOSS_OUTCOME and self.sifting.keep(a, alice_out, b, bob_out):
            m0, window = self.config.m0, self.config.window
            alice_symbol = window_symbol(outcome_index(a, alice_out), m0, window)
            bob_symbol = window_symbol(outcome_index(b, bob_out), m0, window)
            # D-receiver edge outcomes report indices outside the window
            if alice_symbol is not None and bob_symbol is not None:
                record.kept = True
                record.alice_symbol = alice_symbol
                record.bob_symbol = bob_symbol
        return record

    def run_range(self, start: int, stop: int) -> list[TrialRecord]:
        return [self.trial(t) for t in range(start, stop)]

    def run(self) -> ProtocolResult:
        started = time.perf_counter()
        trials = self.config.trials
        workers = max(1, min(self.config.workers, trials or 1))
        chunk = max(1, -(-trials // (workers * 4))) if trials else 1
        ranges = [(s, min(s + chunk, trials)) for s in range(0, trials, chunk)]

        if workers == 1:
            parts = [self.run_range(s, e) for s, e in ranges]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(lambda r: self.run_range(*r), ranges))
        transcript = [record for part in parts for record in part]

        result = ProtocolResult(
            config=self.config,
            seed=self.seed,
            transcript=transcript,
            counts=tally(transcript),
            expected=self.expected(),
            alice_key=[r.alice_symbol for r in transcript if r.kept],
            bob_key=[r.bob_symbol for r in transcript if r.kept],
            filter_retention=filter_retention(self.config),
        )
        result.wall_time = time.perf_counter() - started
        self.logger.info(
            f"Ran {trials} trials (seed {self.seed}, {workers} workers): "
            f"{result.sifted} sifted in {result.wall_time:.2f}s"
        )
        return result


def tally(transcript: list[TrialRecord]) -> dict[str, CountTable]:
    """Coincidence counts per basis pair."""
    counts: dict[str, dict[str, int]] = {pair: {} for pair in BASIS_PAIRS}
    lost = dict.fromkeys(BASIS_PAIRS, 0)
    trials = dict.fromkeys(BASIS_PAIRS, 0)
    for record in transcript:
        pair = record.basis_pair
        trials[pair] += 1
        if record.alice_outcome == LOSS_OUTCOME or record.bob_outcome == LOSS_OUTCOME:
            lost[pair] += 1
            continue
        key = coincidence_key(record.alice_outcome, record.bob_outcome)
        counts[pair][key] = counts[pair].get(key, 0) + 1
    return {pair: CountTable(counts=counts[pair], lost=lost[pair], trials=trials[pair]) for pair in BASIS_PAIRS}


def run_protocol(config: ProtocolConfig, seed: Optional[int] = None) -> ProtocolResult:
    """
    Simulate the protocol.

    Raises:
        BuilderError: If the sequence cannot support the receivers
    """
    return ProtocolRunner(config, seed).run()


# =============================================================================
# Tamper detection
# =============================================================================

class Verdict(str, Enum):
    CLEAN = "clean"
    TAMPERED = "tampered"


class TableTest(BaseModel):
    """Chi-square test of one basis-pair table."""

    table: str
    trials: int
    statistic: float
    dof: int
    p_value: float
    threshold: float


class TamperReport(BaseModel):
    """Per-table tests and the overall verdict."""

    verdict: Verdict
    alpha: float
    effective_alpha: float
    tests: list[TableTest] = Field(default_factory=list)
    skipped: list[str] = Field(default_factory=list)


def detect_eavesdropper(
    statistics: dict[str, CountTable],
    expected: dict[str, Distribution],
    alpha: float,
    family_correction: bool = True,
) -> TamperReport:
    """
    Chi-square test of every basis-pair table against its no-Eve distribution.

    With family_correction the per-table level is 1 - (1 - alpha)^(1/m) over
    the m tested tables. Tampered iff any p-value is at most that level.

    Raises:
        InsufficientCountsError: If no table has enough expected counts
    """
    usable: list[tuple[str, tuple[float, int]]] = []
    skipped: list[str] = []
    for name in sorted(statistics):
        table = statistics[name]
        try:
            require_counts(expected[name], table.trials)
            usable.append((name, chi_square(table, expected[name])))
        except (InsufficientCountsError, DegenerateDistributionError):
            skipped.append(name)

    if not usable:
        raise InsufficientCountsError("no basis-pair table has enough trials for a chi-square test")

    m = len(usable)
    level = 1.0 - (1.0 - alpha) ** (1.0 / m) if family_correction and m > 1 else alpha
    tests = [
        TableTest(
            table=name,
            trials=statistics[name].trials,
            statistic=stat,
            dof=dof,
            p_value=chi_square_pvalue(stat, dof),
            threshold=chi_square_threshold(dof, level) if level < 1.0 else 0.0,
        )
        for name, (stat, dof) in usable
    ]
    tampered = any(t.p_value <= level for t in tests)
    verdict = Verdict.TAMPERED if tampered else Verdict.CLEAN
    logger.info(f"Tamper test over {m} tables at level {level:.3g}: {verdict.value}")
    return TamperReport(verdict=verdict, alpha=alpha, effective_alpha=level, tests=tests, skipped=skipped)

"""
Tests for the Fibonacci-pair key distribution protocol.

Tests the source state, receivers, sifting rules, the eavesdropper and the
chi-square tamper test.
"""

from fractions import Fraction
import math

import numpy as np
import pytest

from src.core.errors import InsufficientCountsError, StateError
from src.models.measurement import CountTable, Distribution
from src.models.protocol import Basis, EveKind, EveModel, ProtocolConfig, SiftingRule, TrialRecord
from src.optics.state import Mode
from src.qkd.eve import EveChannel, eve_channel, resend_state
from src.qkd.protocol import (
    ProtocolRunner,
    Verdict,
    blend_symbol_errors,
    detect_eavesdropper,
    run_protocol,
    tally,
)
from src.qkd.sifting import consistent, get_sifting, outcome_index, symbol_bits, window_symbol
from src.qkd.source import build_receivers, filter_retention, generate_pair


@pytest.fixture
def small_config():
    """Window F_3 .. F_6 = 3, 5, 8, 13"""
    return ProtocolConfig(m0=3, N=4, trials=2000, seed=5)


class TestSource:
    """Test suite for the pair source and receivers"""

    def test_pair_is_symmetric_and_normalized(self, small_config):
        joint = generate_pair(small_config)
        assert joint.norm2() == pytest.approx(1.0)
        for (a, b), amp in joint.items():
            assert joint.amplitude(b, a) == pytest.approx(amp)
        assert joint.amplitude(Mode("in", 8), Mode("in", 5)) == pytest.approx(1 / math.sqrt(6))
        assert joint.amplitude(Mode("in", 3), Mode("in", 8)) == 0

    def test_photons_carry_adjacent_values(self, small_config):
        joint = generate_pair(small_config)
        values = {3, 5, 8, 13}
        for (a, b), _ in joint.items():
            assert {a.label, b.label} <= values
            assert a.label != b.label

    def test_filter_retention(self, small_config):
        """Test 3, 5, 8, 13 are the Fibonacci members of 3..13"""
        assert filter_retention(small_config) == Fraction(4, 11)

    def test_receivers(self, small_config):
        receivers = build_receivers(small_config)
        assert receivers.detectors(Basis.L) == ["L_3", "L_4", "L_5", "L_6"]
        d_detectors = receivers.detectors(Basis.D)
        assert "C_5" in d_detectors and "D_6" in d_detectors
        assert set(receivers.projectors) == {Basis.L, Basis.D}

    def test_window_must_fit_sequence(self):
        with pytest.raises(ValueError, match="not generated"):
            ProtocolConfig(m0=14, N=4)


class TestSifting:
    """Test suite for sifting rules"""

    def test_outcome_index(self):
        assert outcome_index(Basis.L, "L_4") == 4
        assert outcome_index(Basis.D, "C_6") == 5
        assert outcome_index(Basis.D, "D_6") is None
        assert outcome_index(Basis.L, "C_6") is None
        assert outcome_index(Basis.D, "loss") is None

    def test_relations(self):
        assert consistent("LL", 4, 5)
        assert not consistent("LL", 4, 4)
        assert consistent("LD", 4, 6)
        assert consistent("DD", 3, 6)
        assert not consistent("DD", 3, 5)

    def test_strategies(self):
        c_rule = get_sifting("c_detector")
        l_rule = get_sifting(SiftingRule.L_ONLY)
        assert c_rule.keep(Basis.L, "L_3", Basis.D, "C_5")
        assert not c_rule.keep(Basis.L, "L_3", Basis.D, "D_5")
        assert not l_rule.keep(Basis.L, "L_3", Basis.D, "C_5")
        assert l_rule.keep(Basis.L, "L_3", Basis.L, "L_4")

    def test_symbol_bits(self):
        assert symbol_bits(5, 8) == "101"
        assert symbol_bits(1, 4) == "01"
        assert symbol_bits(1, 6) is None

    def test_symbols_outside_window_rejected(self):
        """Test out-of-window symbols raise instead of wrapping around"""
        with pytest.raises(ValueError, match="outside the window"):
            symbol_bits(-1, 4)
        with pytest.raises(ValueError, match="outside the window"):
            symbol_bits(4, 4)

    def test_window_symbol(self):
        assert window_symbol(3, 3, 4) == 0
        assert window_symbol(6, 3, 4) == 3
        assert window_symbol(2, 3, 4) is None
        assert window_symbol(7, 3, 4) is None


class TestEavesdropper:
    """Test suite for the intercept-resend channel"""

    def test_resend_rules(self, small_config):
        receivers = build_receivers(small_config)
        assert resend_state("L_4", receivers).amplitude(Mode("in", 5)) == pytest.approx(1.0)
        s = resend_state("C_6", receivers)
        assert abs(s.amplitude(Mode("in", 5))) == pytest.approx(1 / math.sqrt(2))
        with pytest.raises(StateError):
            resend_state("X_1", receivers)

    def test_inactive_channel_passes_state(self, small_config):
        receivers = build_receivers(small_config)
        state = generate_pair(small_config)
        out = eve_channel(EveModel(), state, np.random.default_rng(0), receivers)
        assert out is state

    def test_l_interception_breaks_entanglement(self, small_config):
        """Test Eve's L table sums to one and leaves product states"""
        receivers = build_receivers(small_config)
        channel = EveChannel(EveModel(kind=EveKind.INTERCEPT_RESEND_L), generate_pair(small_config), receivers)
        options, cumulative = channel.table(Basis.L)
        assert cumulative[-1] == pytest.approx(1.0)
        assert {o.outcome for o in options} == {"L_3", "L_4", "L_5", "L_6"}
        joint, outcome = channel.apply(np.array([0.0, 0.0, 0.0]))
        assert outcome == options[0].outcome
        assert joint.norm2() == pytest.approx(1.0)

    def test_basis_choice(self, small_config):
        receivers = build_receivers(small_config)
        state = generate_pair(small_config)
        random_eve = EveChannel(EveModel(kind=EveKind.INTERCEPT_RESEND_RANDOM), state, receivers)
        assert random_eve.basis_for(0.2) == Basis.L
        assert random_eve.basis_for(0.7) == Basis.D
        d_eve = EveChannel(EveModel(kind=EveKind.INTERCEPT_RESEND_D), state, receivers)
        assert d_eve.basis_for(0.2) == Basis.D


class TestProtocol:
    """Test suite for run_protocol"""

    def test_zero_trials(self, small_config):
        result = run_protocol(small_config.model_copy(update={"trials": 0}))
        assert result.transcript == []
        assert result.agreement is None
        assert all(table.trials == 0 for table in result.counts.values())
        assert result.summary()["sift_rate"] == 0.0

    def test_deterministic_across_workers(self, small_config):
        """Test the transcript depends only on the seed"""
        single = run_protocol(small_config)
        threaded = run_protocol(small_config.model_copy(update={"workers": 4}))
        assert single.transcript == threaded.transcript
        assert single.alice_key == threaded.alice_key

    def test_seed_argument_overrides_config(self, small_config):
        assert run_protocol(small_config, seed=9).seed == 9
        assert ProtocolRunner(small_config).seed == 5

    def test_full_key_agreement_without_eve(self, small_config):
        """Test every kept trial satisfies the source relation"""
        result = run_protocol(small_config)
        assert result.sifted > 0
        assert result.agreement == 1.0
        assert len(result.alice_key) == len(result.bob_key)

    def test_kept_symbols_stay_in_window(self, small_config):
        """Test D-receiver edge outcomes never become key symbols"""
        result = run_protocol(small_config.model_copy(update={"trials": 4000}))
        kept = [r for r in result.transcript if r.kept]
        assert any("D" in r.basis_pair for r in kept)
        for r in kept:
            assert r.alice_symbol in range(4)
            assert r.bob_symbol in range(4)
        assert len(result.key_bits()) == 2 * result.sifted

    def test_counts_cover_transcript(self, small_config):
        result = run_protocol(small_config)
        assert sum(table.trials for table in result.counts.values()) == small_config.trials
        for dist in result.expected.values():
            assert dist.detected() + dist.loss == pytest.approx(1.0)

    def test_key_bits(self, small_config):
        result = run_protocol(small_config)
        bits = result.key_bits()
        assert bits is not None
        assert len(bits) == 2 * result.sifted

    def test_expected_ll_table(self, small_config):
        """Test L/L coincidences only pair adjacent indices"""
        expected = ProtocolRunner(small_config).expected()["LL"]
        assert expected.probability("L_3|L_4") == pytest.approx(1 / 6)
        assert expected.probability("L_3|L_5") == pytest.approx(0.0)
        assert expected.loss == pytest.approx(0.0, abs=1e-12)

    def test_clean_verdict_without_eve(self):
        result = run_protocol(ProtocolConfig(trials=10_000, seed=3))
        report = detect_eavesdropper(result.counts, result.expected, alpha=0.001)
        assert report.verdict == Verdict.CLEAN
        assert len(report.tests) + len(report.skipped) == 4

    @pytest.mark.slow
    def test_intercept_resend_detected(self):
        """Test an L-basis eavesdropper on every photon is flagged"""
        config = ProtocolConfig(trials=10_000, seed=3, eve=EveModel(kind=EveKind.INTERCEPT_RESEND_L))
        result = run_protocol(config)
        report = detect_eavesdropper(result.counts, result.expected, alpha=0.001)
        assert report.verdict == Verdict.TAMPERED


def tamper_report(seed: int, probability: float, trials: int = 10_000):
    eve = EveModel(kind=EveKind.INTERCEPT_RESEND_L, probability=probability)
    result = run_protocol(ProtocolConfig(trials=trials, seed=seed, eve=eve, workers=4))
    return detect_eavesdropper(result.counts, result.expected, alpha=0.001)


@pytest.mark.slow
class TestAcceptanceRuns:
    """Long protocol runs for the tamper test's size and power"""

    def test_null_run_is_clean(self):
        result = run_protocol(ProtocolConfig(trials=100_000, seed=7, workers=4))
        report = detect_eavesdropper(result.counts, result.expected, alpha=0.001)
        assert report.verdict == Verdict.CLEAN
        assert result.agreement == 1.0

    def test_tamper_sweep(self):
        """Test full L-basis interception at 10^4 trials is flagged for at least 99 of 100 seeds"""
        detected = sum(tamper_report(seed, 1.0).verdict == Verdict.TAMPERED for seed in range(100))
        assert detected >= 99

    def test_false_alarms_stay_rare(self):
        false_alarms = sum(tamper_report(seed, 0.0).verdict == Verdict.TAMPERED for seed in range(100))
        assert false_alarms <= 5

    def test_statistic_grows_with_interception(self):
        means = []
        for probability in (0.0, 0.5, 1.0):
            totals = [
                sum(test.statistic for test in tamper_report(seed, probability).tests) for seed in range(20)
            ]
            means.append(float(np.mean(totals)))
        assert means == sorted(means)
        assert means[2] > means[0]


class TestTamperTest:
    """Test suite for detect_eavesdropper and tally"""

    @pytest.fixture
    def expected(self):
        return {"LL": Distribution(probabilities={"A|B": 0.5, "B|A": 0.5})}

    def test_alpha_one_always_tampered(self, expected):
        counts = {"LL": CountTable(counts={"A|B": 50, "B|A": 50}, trials=100)}
        report = detect_eavesdropper(counts, expected, alpha=1.0)
        assert report.verdict == Verdict.TAMPERED

    def test_perfect_fit_is_clean(self, expected):
        counts = {"LL": CountTable(counts={"A|B": 50, "B|A": 50}, trials=100)}
        report = detect_eavesdropper(counts, expected, alpha=0.001)
        assert report.verdict == Verdict.CLEAN
        assert report.tests[0].p_value == pytest.approx(1.0)

    def test_family_correction(self):
        """Test the per-table level is 1 - (1 - alpha)^(1/m)"""
        dist = Distribution(probabilities={"A|B": 0.5, "B|A": 0.5})
        table = CountTable(counts={"A|B": 50, "B|A": 50}, trials=100)
        report = detect_eavesdropper({"LL": table, "DD": table}, {"LL": dist, "DD": dist}, alpha=0.01)
        assert report.effective_alpha == pytest.approx(1 - 0.99 ** 0.5)
        uncorrected = detect_eavesdropper(
            {"LL": table, "DD": table}, {"LL": dist, "DD": dist}, alpha=0.01, family_correction=False
        )
        assert uncorrected.effective_alpha == 0.01

    def test_too_few_trials(self, expected):
        counts = {"LL": CountTable(counts={"A|B": 2}, trials=2)}
        with pytest.raises(InsufficientCountsError):
            detect_eavesdropper(counts, expected, alpha=0.001)

    def test_small_tables_skipped(self, expected):
        dist = expected["LL"]
        counts = {
            "LL": CountTable(counts={"A|B": 50, "B|A": 50}, trials=100),
            "DD": CountTable(counts={"A|B": 1}, trials=1),
        }
        report = detect_eavesdropper(counts, {"LL": dist, "DD": dist}, alpha=0.001)
        assert report.skipped == ["DD"]

    def test_tally(self):
        records = [
            TrialRecord(trial=0, alice_basis="L", bob_basis="L", alice_outcome="L_3", bob_outcome="L_4"),
            TrialRecord(trial=1, alice_basis="L", bob_basis="D", alice_outcome="loss", bob_outcome="loss"),
            TrialRecord(trial=2, alice_basis="L", bob_basis="L", alice_outcome="L_3", bob_outcome="L_4"),
        ]
        counts = tally(records)
        assert counts["LL"].counts == {"L_3|L_4": 2}
        assert counts["LD"].lost == 1
        assert counts["DD"].trials == 0

    def test_blend_symbol_errors(self):
        dist = Distribution(probabilities={"A|X": 0.5, "A|Y": 0.0, "B|X": 0.0, "B|Y": 0.5})
        blended = blend_symbol_errors(dist, ["X", "Y"], 0.5)
        assert blended.probability("A|X") == pytest.approx(0.375)
        assert blended.probability("A|Y") == pytest.approx(0.125)
        assert blend_symbol_errors(dist, ["X", "Y"], 0.0) is dist

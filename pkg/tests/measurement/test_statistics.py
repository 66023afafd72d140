"""
Unit tests for detector statistics.

Tests distributions, seeded sampling, coincidences and the chi-square test.
"""

import math

import pytest
from pydantic import ValidationError

from src.builders.mub4 import build_l_analyzer
from src.core.errors import (
    DegenerateDistributionError,
    InsufficientCountsError,
    MeasurementError,
    UnknownSourceError,
)
from src.measurement.statistics import (
    chi_square,
    chi_square_pvalue,
    chi_square_threshold,
    coincidence_key,
    coincidence_probabilities,
    empirical,
    marginal,
    probabilities,
    require_counts,
    sample,
    split_coincidence_key,
    stream,
    total_variation,
)
from src.models.measurement import CountTable, Distribution
from src.optics.circuit import Circuit
from src.optics.elements import Attenuator, BeamSplitter
from src.optics.state import Mode, PureState, TwoPhotonState

R = 1 / math.sqrt(2)


@pytest.fixture
def quarters():
    """Four equally likely outcomes"""
    return Distribution(probabilities={"A": 0.25, "B": 0.25, "C": 0.25, "D": 0.25})


class TestDistribution:
    """Test suite for the Distribution and CountTable models"""

    def test_from_weights_assigns_loss(self):
        dist = Distribution.from_weights({"B": 0.5, "A": 0.25})
        assert dist.outcomes() == ["A", "B"]
        assert dist.loss == pytest.approx(0.25)
        assert dist.probability("loss") == pytest.approx(0.25)
        assert dist.probability("Z") == 0.0
        assert dist.detected() == pytest.approx(0.75)

    def test_total_must_be_one(self):
        with pytest.raises(ValidationError, match="sum to"):
            Distribution(probabilities={"A": 0.5}, loss=0.1)

    def test_negative_rejected(self):
        with pytest.raises(ValidationError, match="negative"):
            Distribution(probabilities={"A": 1.5, "B": -0.5})

    def test_loss_name_reserved(self):
        """Test an outcome named like the loss cell is rejected"""
        with pytest.raises(ValidationError, match="reserved"):
            Distribution(probabilities={"A": 0.5, "loss": 0.5})

    def test_postselected(self):
        dist = Distribution(probabilities={"A": 0.25, "B": 0.25}, loss=0.5)
        post = dist.postselected()
        assert post.probability("A") == pytest.approx(0.5)
        assert post.loss == 0.0
        with pytest.raises(ValueError, match="nothing is detected"):
            Distribution(probabilities={"A": 0.0}, loss=1.0).postselected()

    def test_count_table(self):
        table = CountTable(counts={"A": 3, "B": 5}, lost=2, trials=10)
        assert table.count("A") == 3
        assert table.count("loss") == 2
        assert table.frequencies() == {"A": 0.3, "B": 0.5}
        total = table + CountTable(counts={"A": 1}, trials=1)
        assert total.count("A") == 4
        assert total.trials == 11

    def test_count_table_overflow(self):
        with pytest.raises(ValidationError, match="exceed"):
            CountTable(counts={"A": 8}, lost=3, trials=10)


class TestProbabilities:
    """Test suite for probabilities()"""

    def test_loss_from_attenuation(self):
        circuit = Circuit(["in"], [Attenuator("in", 0.5)], {"X": "in"})
        dist = probabilities(circuit, PureState.basis("in", 1))
        assert dist.probability("X") == pytest.approx(0.25)
        assert dist.loss == pytest.approx(0.75)

    def test_splitter(self):
        circuit = Circuit(["in"], [BeamSplitter("in", "v", "c", "d")], {"C": "c", "D": "d"})
        dist = probabilities(circuit, PureState.basis("in", 1))
        assert dist.probabilities == pytest.approx({"C": 0.5, "D": 0.5})


class TestSampling:
    """Test suite for seeded sampling"""

    def test_reproducible(self, quarters):
        """Test one seed always gives the same table"""
        assert sample(quarters, seed=7, n=10_000) == sample(quarters, seed=7, n=10_000)
        assert sample(quarters, seed=7, n=10_000) != sample(quarters, seed=8, n=10_000)

    def test_totals(self, quarters):
        table = sample(quarters, seed=1, n=9_999)
        assert sum(table.counts.values()) + table.lost == 9_999
        assert table.trials == 9_999
        assert table.lost == 0

    def test_frequencies_converge(self, quarters):
        table = sample(quarters, seed=3, n=200_000)
        for name in "ABCD":
            assert table.frequencies()[name] == pytest.approx(0.25, abs=0.01)

    def test_loss_is_an_outcome(self):
        dist = Distribution(probabilities={"A": 0.5}, loss=0.5)
        table = sample(dist, seed=2, n=10_000)
        assert table.lost == pytest.approx(5_000, abs=300)

    def test_zero_and_negative_trials(self, quarters):
        assert sample(quarters, seed=1, n=0) == CountTable(trials=0)
        with pytest.raises(MeasurementError):
            sample(quarters, seed=1, n=-1)

    def test_streams_are_independent(self):
        a = stream(5, 0).random(4)
        b = stream(5, 1).random(4)
        assert list(a) != list(b)
        assert list(a) == list(stream(5, 0).random(4))


class TestCoincidences:
    """Test suite for two-photon coincidences"""

    @pytest.fixture
    def analyzers(self):
        return build_l_analyzer([2, 3]), build_l_analyzer([2, 3])

    def test_keys(self):
        assert coincidence_key("L_1", "L_2") == "L_1|L_2"
        assert split_coincidence_key("L_1|L_2") == ("L_1", "L_2")

    def test_entangled_pair_correlates(self, analyzers):
        """Test (|2>|2> + |3>|3>)/sqrt(2) only fires matching detectors"""
        joint = TwoPhotonState({
            (Mode("in", 2), Mode("in", 2)): R,
            (Mode("in", 3), Mode("in", 3)): R,
        })
        dist = coincidence_probabilities(*analyzers, joint)
        assert dist.probability("L_1|L_1") == pytest.approx(0.5)
        assert dist.probability("L_2|L_2") == pytest.approx(0.5)
        assert dist.probability("L_1|L_2") == pytest.approx(0.0)
        assert marginal(dist, 0) == pytest.approx({"L_1": 0.5, "L_2": 0.5})

    def test_one_photon_lost(self, analyzers):
        """Test a pair counts as lost when either photon misses"""
        joint = TwoPhotonState.product(PureState.basis("in", 2), PureState.basis("in", 7))
        dist = coincidence_probabilities(*analyzers, joint)
        assert dist.loss == pytest.approx(1.0)

    def test_off_source_photon(self, analyzers):
        joint = TwoPhotonState.product(PureState.basis("x", 2), PureState.basis("in", 2))
        with pytest.raises(UnknownSourceError):
            coincidence_probabilities(*analyzers, joint)


class TestChiSquare:
    """Test suite for Pearson goodness-of-fit"""

    def test_perfect_fit(self):
        expected = Distribution(probabilities={"A": 0.5, "B": 0.5})
        observed = CountTable(counts={"A": 50, "B": 50}, trials=100)
        assert chi_square(observed, expected) == (0.0, 1)

    def test_known_statistic(self):
        """Test (60-50)^2/50 + (40-50)^2/50 = 4"""
        expected = Distribution(probabilities={"A": 0.5, "B": 0.5})
        observed = CountTable(counts={"A": 60, "B": 40}, trials=100)
        statistic, dof = chi_square(observed, expected)
        assert statistic == pytest.approx(4.0)
        assert dof == 1

    def test_small_cells_pooled(self):
        """Test cells below five expected counts merge into one"""
        expected = Distribution(probabilities={"A": 0.9, "B": 0.05, "C": 0.05})
        observed = CountTable(counts={"A": 54, "B": 3, "C": 3}, trials=60)
        assert chi_square(observed, expected) == (pytest.approx(0.0), 1)

    def test_impossible_outcome(self):
        expected = Distribution(probabilities={"A": 1.0})
        observed = CountTable(counts={"A": 99}, lost=1, trials=100)
        statistic, _ = chi_square(observed, expected)
        assert statistic == float("inf")

    def test_degenerate(self):
        expected = Distribution(probabilities={"A": 1.0})
        observed = CountTable(counts={"A": 100}, trials=100)
        with pytest.raises(DegenerateDistributionError):
            chi_square(observed, expected)

    def test_unknown_outcome(self):
        expected = Distribution(probabilities={"A": 1.0})
        with pytest.raises(MeasurementError, match="not in the expected"):
            chi_square(CountTable(counts={"Z": 1}, trials=1), expected)

    def test_empty_table(self):
        with pytest.raises(MeasurementError):
            chi_square(CountTable(trials=0), Distribution(probabilities={"A": 1.0}))

    def test_pvalue_and_threshold(self):
        assert chi_square_pvalue(0.0, 1) == pytest.approx(1.0)
        assert chi_square_threshold(1, 0.05) == pytest.approx(3.841458820694124)
        assert chi_square_pvalue(3.841458820694124, 1) == pytest.approx(0.05)
        with pytest.raises(DegenerateDistributionError):
            chi_square_pvalue(1.0, 0)

    def test_sampled_counts_fit(self, quarters):
        """Test counts drawn from a distribution are not rejected at 0.1%"""
        statistic, dof = chi_square(sample(quarters, seed=11, n=20_000), quarters)
        assert chi_square_pvalue(statistic, dof) > 0.001

    def test_require_counts(self):
        expected = Distribution(probabilities={"A": 0.5, "B": 0.5})
        require_counts(expected, 10)
        with pytest.raises(InsufficientCountsError):
            require_counts(expected, 5)


class TestEmpirical:
    """Test suite for empirical distributions"""

    def test_empirical(self):
        dist = empirical(CountTable(counts={"A": 3, "B": 5}, lost=2, trials=10))
        assert dist.probability("A") == pytest.approx(0.3)
        assert dist.loss == pytest.approx(0.2)
        assert empirical(CountTable(trials=0)) is None

    def test_total_variation(self):
        assert total_variation({"A": 1.0}, {"B": 1.0}) == pytest.approx(1.0)
        assert total_variation({"A": 0.5, "B": 0.5}, {"A": 0.5, "B": 0.5}) == 0.0

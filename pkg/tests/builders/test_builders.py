"""
Unit tests for the apparatus builders.

Every builder must pass its own oracle self-test; the closed-form detector
statistics are checked here independently as well.
"""

import numpy as np
import pytest

from src.builders.cd_tree import ChainParity, build_cd_tree, chain_indices
from src.builders.jump import build_jump_tree
from src.builders.mub4 import build_l_analyzer, build_mub4, build_mub4_switch, cross_overlaps
from src.builders.polarization import build_polarization_mz, build_polarization_pair, diagonal_state
from src.builders.registry import create_default_registry
from src.builders.rsg import (
    CELL_OUTPUTS,
    build_rsg,
    build_rsg_cell,
    output_states,
    recurrence_fidelities,
    seed_state,
)
from src.builders.sgdt import (
    SuperpositionTarget,
    build_sgdt,
    parse_coefficients,
    parse_values,
    random_target,
    synthesize,
    synthesizer_ports,
    target_from_params,
)
from src.builders.tribonacci import build_nbonacci_tree, build_tribonacci_tree
from src.builders.verify import ket, label_content
from src.core.errors import BuilderError
from src.measurement.statistics import probabilities
from src.optics.circuit import detector_projectors, simulate, source_basis
from src.optics.sequences import SequenceSpec, SequenceWindow, make_named_state
from src.optics.state import PureState, fidelity, global_phase_distance

# Parameters every registered builder is self-tested with
BUILD_PARAMS = {
    "cd-tree": {},
    "sgdt": {"coeffs": "1,-0.5,1j"},
    "tribonacci": {},
    "nbonacci": {"order": 4},
    "jump": {"values": "2,3,5,8,13", "stride": 2},
    "mub4": {},
    "mub4-switch": {},
    "l-analyzer": {"values": "3,8,21"},
    "rsg-cell": {},
    "rsg": {"cells": 4},
    "synthesizer": {"coeffs": "1,0.5,-0.25j", "values": "2,3,5"},
    "polarization-mz": {},
    "polarization-pair": {},
}


@pytest.fixture
def registry():
    """Fresh default builder registry"""
    return create_default_registry()


@pytest.fixture
def window():
    """Fibonacci window F_2 .. F_10"""
    return SequenceWindow(SequenceSpec(range=(2, 89)))


class TestRegisteredBuilders:
    """Test suite running every builder's oracle self-test"""

    def test_registry_covers_all(self, registry):
        """Test the default registry holds exactly the tested builders"""
        assert sorted(registry.names()) == sorted(BUILD_PARAMS)

    @pytest.mark.parametrize("name", sorted(BUILD_PARAMS))
    def test_self_test_passes(self, registry, name):
        """Test build + verify passes within tolerance"""
        result, report = registry.build_and_verify(name, **BUILD_PARAMS[name])
        failed = [c.name for c in report.checks if not c.passed]
        assert report.passed, f"{name} failed checks: {failed}"
        assert report.checks, "every builder runs at least the round-trip check"
        assert report.checks[0].name.startswith("netlist round trip")

    def test_cd_tree_both_parities(self, registry):
        result, report = registry.build_and_verify("cd-tree", parity="both", seq={"range": [1, 100]})
        assert report.passed
        assert "C_9" in result.circuit.detectors
        assert "C_10" in result.circuit.detectors

    def test_cd_tree_lucas(self, registry):
        result, report = registry.build_and_verify("cd-tree", seq={"kind": "lucas", "range": [1, 200]}, parity="even")
        assert report.passed

    @pytest.mark.parametrize("order", [2, 3, 5])
    def test_nbonacci_orders(self, registry, order):
        _, report = registry.build_and_verify("nbonacci", order=order)
        assert report.passed

    def test_sgdt_from_sequence_anchor(self, registry):
        """Test a target anchored in a sequence window"""
        result, report = registry.build_and_verify("sgdt", coeffs=[1, 1], anchor=6)
        assert report.passed
        assert result.data["target"].values == (8, 5)

    def test_unknown_apparatus(self, registry):
        with pytest.raises(BuilderError, match="unknown apparatus"):
            registry.build_and_verify("warp-drive")

    @pytest.mark.parametrize(
        "name,params,match",
        [
            ("rsg", {"cells": "three"}, "must be an integer"),
            ("rsg", {"cells": 2.5}, "must be an integer"),
            ("rsg", {"equalize": "maybe"}, "true or false"),
            ("jump", {"values": "2,3,5", "stride": "x"}, "must be an integer"),
            ("nbonacci", {"order": "four"}, "must be an integer"),
            ("cd-tree", {"first_index": "low"}, "must be an integer"),
            ("sgdt", {"coeffs": "1,1", "anchor": "six"}, "must be an integer"),
            ("sgdt", {"coeffs": [1, "one"]}, "coefficient list"),
        ],
    )
    def test_malformed_params(self, registry, name, params, match):
        """Test unparseable builder parameters raise BuilderError"""
        with pytest.raises(BuilderError, match=match):
            registry.build_and_verify(name, **params)

    def test_duplicate_registration(self, registry):
        from src.builders.cd_tree import CDTreeBuilder

        with pytest.raises(BuilderError, match="already registered"):
            registry.register(CDTreeBuilder())

    def test_describe(self, registry):
        descriptions = registry.describe()
        assert "cd-tree" in registry
        assert all(descriptions.values())

    def test_verification_dict(self, registry):
        """Test the report serializes with its derived fields"""
        _, report = registry.build_and_verify("mub4")
        data = report.to_dict()
        assert data["passed"] is True
        assert data["apparatus"] == "mub4"
        assert data["max_deviation"] <= 1e-10


class TestCDTree:
    """Test suite for the C/D tree"""

    def test_chain_indices(self, window):
        assert chain_indices(window, "odd") == [3, 5, 7, 9]
        assert chain_indices(window, "even-index") == [2, 4, 6, 8, 10]
        assert chain_indices(window, ChainParity.BOTH, 3, 6) == [3, 4, 5, 6]

    def test_chain_too_short(self, window):
        with pytest.raises(BuilderError, match="at least 3"):
            chain_indices(window, "odd", 3, 5)

    def test_bad_parity(self, window):
        with pytest.raises(BuilderError, match="parity"):
            chain_indices(window, "sideways")

    def test_f_n_quarters(self, window):
        """Test F_n fires C_n, D_n, C_{n+2}, D_{n+2} with 1/4 each"""
        circuit = build_cd_tree(window, "odd")
        dist = probabilities(circuit, make_named_state("F", 5, window))
        for name in ("C_5", "D_5", "C_7", "D_7"):
            assert dist.probability(name) == pytest.approx(0.25, abs=1e-12)
        assert dist.loss == pytest.approx(0.0, abs=1e-12)

    def test_s_state_never_fires_d(self, window):
        """Test S_{n-1} fires C_n half the time and never D_n"""
        circuit = build_cd_tree(window, "odd")
        dist = probabilities(circuit, make_named_state("S", 6, window))
        assert dist.probability("C_7") == pytest.approx(0.5, abs=1e-12)
        assert dist.probability("D_7") == pytest.approx(0.0, abs=1e-12)

    def test_c_and_d_states(self, window):
        """Test C_n and D_n light their own detector with probability 1/2"""
        circuit = build_cd_tree(window, "odd")
        c = probabilities(circuit, make_named_state("C", 7, window))
        d = probabilities(circuit, make_named_state("D", 7, window))
        assert c.probability("C_7") == pytest.approx(0.5, abs=1e-12)
        assert c.probability("D_7") == pytest.approx(0.0, abs=1e-12)
        assert d.probability("D_7") == pytest.approx(0.5, abs=1e-12)

    def test_off_chain_labels_rejected(self, window):
        """Test even-index values leave through the sorter reject"""
        circuit = build_cd_tree(window, "odd")
        dist = probabilities(circuit, make_named_state("F", 4, window))
        assert dist.loss == pytest.approx(1.0)

    def test_end_detectors(self, window):
        circuit = build_cd_tree(window, "odd")
        assert circuit.detectors["E_3"] == "lo3"
        assert circuit.detectors["E_9"] == "hi9"


class TestSuperpositionTrees:
    """Test suite for the detection tree and the synthesizer"""

    def test_target_validation(self):
        with pytest.raises(BuilderError, match="distinct"):
            SuperpositionTarget((1, 1), (2, 2))
        with pytest.raises(BuilderError, match="zero"):
            SuperpositionTarget((0, 0), (2, 3))
        with pytest.raises(BuilderError, match="2 coefficients for 3 values"):
            SuperpositionTarget((1, 1), (2, 3, 5))

    def test_parsers(self):
        assert parse_coefficients("1, -0.5, 1j") == (1 + 0j, -0.5 + 0j, 1j)
        assert parse_values("2,3,5") == (2, 3, 5)
        with pytest.raises(BuilderError):
            parse_values("2,x")
        with pytest.raises(BuilderError, match="coeffs"):
            target_from_params({})

    def test_detector_c_measures_target(self):
        """Test the C bra equals the target up to phase and scale"""
        target = SuperpositionTarget((1.0, -0.5, 0.25j), (2, 3, 5))
        circuit = build_sgdt(target)
        projector = detector_projectors(circuit, source_basis(circuit, target.values))["C"]
        assert global_phase_distance(projector.bra, target.state()) < 1e-10

    def test_single_term_target(self):
        target = SuperpositionTarget((2.0,), (13,))
        circuit = build_sgdt(target)
        assert circuit.detectors == {"C": "line1"}

    @pytest.mark.parametrize("seed", range(5))
    def test_synthesizer_random_targets(self, seed):
        """Test the synthesizer output matches random complex targets"""
        target = random_target(np.random.default_rng(seed))
        out = synthesize(target)
        assert global_phase_distance(out, target.state()) < 1e-10

    def test_detector_c_random_sweep(self):
        """Test the C bra matches 100 random targets of up to five terms"""
        rng = np.random.default_rng(2024)
        for _ in range(100):
            target = random_target(rng)
            assert len(target.values) <= 5
            circuit = build_sgdt(target)
            projector = detector_projectors(circuit, source_basis(circuit, target.values))["C"]
            assert global_phase_distance(projector.bra, target.state()) < 1e-10, target

    def test_synthesis_is_detection_reversed(self):
        """Test the synthesized ket equals the conjugated C row for 50 random targets"""
        rng = np.random.default_rng(77)
        for _ in range(50):
            target = random_target(rng)
            circuit = build_sgdt(target)
            bra = detector_projectors(circuit, source_basis(circuit, target.values))["C"].bra
            out = synthesize(target)
            assert global_phase_distance(label_content(bra), label_content(out)) < 1e-10, target

    def test_synthesizer_difference_target(self):
        """Test target (1, -1) puts the difference on C and the sum on the former D port"""
        target = SuperpositionTarget((1.0, -1.0), (8, 3))
        ports = synthesizer_ports(target)
        assert set(ports) == {"C", "D_2"}
        difference = synthesize(target)
        total = synthesize(target, ports["D_2"])
        assert global_phase_distance(difference, ket([8, 3], [1, -1])) < 1e-10
        assert global_phase_distance(total, ket([8, 3], [1, 1])) < 1e-10
        assert difference.norm2() == pytest.approx(0.5, abs=1e-12)
        assert total.norm2() == pytest.approx(0.5, abs=1e-12)


class TestTribonacciTrees:
    """Test suite for the order-r trees"""

    def test_uniform_ratio(self):
        """Test a uniform group input fires D/C in the ratio 1/9"""
        window = SequenceWindow(SequenceSpec(kind="tribonacci", range=(1, 200)))
        circuit = build_tribonacci_tree(window)
        values = [window.value(6 - j) for j in range(3)]
        dist = probabilities(circuit, ket(values, [1, 1, 1]).normalized())
        assert dist.probability("D_6") / dist.probability("C_6") == pytest.approx(1 / 9)

    def test_order_must_fit_window(self):
        window = SequenceWindow(SequenceSpec(range=(1, 3)))
        with pytest.raises(BuilderError):
            build_nbonacci_tree(window, 3)


class TestJumpTree:
    """Test suite for the jump tree"""

    def test_bras(self):
        """Test C_k ~ c1 x_k + c2 x_{k-1} and D_k ~ c1 x_k - c2 x_{k-1}"""
        values = [2, 3, 5, 8]
        circuit = build_jump_tree(values, (-1.0, 0.5))
        projectors = detector_projectors(circuit, source_basis(circuit, values))
        assert global_phase_distance(projectors["C_3"].bra, ket([5, 3], [-1.0, 0.5])) < 1e-10
        assert global_phase_distance(projectors["D_3"].bra, ket([5, 3], [-1.0, -0.5])) < 1e-10

    def test_stride_two_pairs_next_nearest(self):
        circuit = build_jump_tree([2, 3, 5, 8], (1, 1), stride=2)
        assert sorted(n for n in circuit.detectors if n.startswith("C_")) == ["C_3", "C_4"]

    @pytest.mark.parametrize(
        "kwargs,match",
        [
            ({"coefficients": (1, 0)}, "nonzero"),
            ({"coefficients": (1, 1, 1)}, "two coefficients"),
            ({"stride": 3}, "stride"),
        ],
    )
    def test_invalid(self, kwargs, match):
        with pytest.raises(BuilderError, match=match):
            build_jump_tree([2, 3, 5], **kwargs)


class TestMUB4:
    """Test suite for the four-dimensional analyzers"""

    def test_unbiased(self):
        """Test every L bra overlaps every M bra with 1/4"""
        values = [2, 3, 5, 8]
        l_circuit, m_circuit = build_mub4(values)
        l_proj = detector_projectors(l_circuit, source_basis(l_circuit, values))
        m_proj = detector_projectors(m_circuit, source_basis(m_circuit, values))
        overlaps = cross_overlaps(l_proj, m_proj)
        assert len(overlaps) == 16
        assert all(o == pytest.approx(0.25) for o in overlaps.values())

    def test_needs_four_distinct_values(self):
        with pytest.raises(BuilderError, match="expected 4"):
            build_mub4([2, 3, 5])
        with pytest.raises(BuilderError, match="distinct"):
            build_mub4([2, 3, 5, 5])

    def test_switch_halves_weights(self):
        circuit = build_mub4_switch([2, 3, 5, 8])
        dist = probabilities(circuit, PureState.basis("in", 5))
        assert dist.probability("L_3") == pytest.approx(0.5)
        assert sum(dist.probability(f"M_{k}") for k in range(1, 5)) == pytest.approx(0.5)

    def test_l_analyzer_custom_indices(self):
        circuit = build_l_analyzer([3, 8, 21], [3, 5, 7])
        assert set(circuit.detectors) == {"L_3", "L_5", "L_7"}
        dist = probabilities(circuit, PureState.basis("in", 8))
        assert dist.probability("L_5") == pytest.approx(1.0)


class TestRSG:
    """Test suite for the recursive state generator"""

    @pytest.mark.parametrize("p", [1, 2, 3, 4])
    def test_outputs_follow_recurrence(self, p):
        """Test output k+2 is proportional to x_{k+1} + x_k with equal norms"""
        circuit = build_rsg(p)
        outputs = output_states(circuit, seed_state((1, 2)), p + 2)
        norms = [o.norm2() for o in outputs]
        assert max(norms) - min(norms) < 1e-10
        assert all(f == pytest.approx(1.0, abs=1e-10) for f in recurrence_fidelities(outputs))

    @pytest.mark.parametrize("p", [1, 2, 3, 4])
    def test_intensity_halves_per_cell(self, p):
        """Test each added cell halves the per-port intensity before equalization"""
        out = simulate(build_rsg(p, equalize=False), seed_state((1, 2)))
        intensities = [out.path_norm2(f"x{k}") for k in range(1, p + 3)]
        # cell k leaves x_k; the last cell also leaves x_{p+1} at its level
        expected = [0.5 ** (k + 2) for k in range(p)] + [0.5 ** (p + 1)]
        assert intensities[: p + 1] == pytest.approx(expected, abs=1e-10)
        # the sum port interferes overlapping inputs, so it is never dimmer
        assert intensities[p + 1] >= intensities[p] - 1e-10

    def test_cell_outputs_equal_thirds(self):
        """Test the post-selected cell output is an equal three-port superposition"""
        r = 1.0 / np.sqrt(2.0)
        state = PureState.basis("in1", 3, r) + PureState.basis("in2", 5, r)
        out = simulate(build_rsg_cell(), state)
        intensities = [out.path_norm2(port) for port in CELL_OUTPUTS]
        assert intensities == pytest.approx([0.25, 0.25, 0.25], abs=1e-12)
        target = PureState.superposition("out", {3: r, 5: r})
        assert fidelity(label_content(out, "out3"), target) == pytest.approx(1.0, abs=1e-12)

    def test_cell_bottom_line_attenuation(self):
        """Test input 2 reaches the sum port at amplitude 1/2 and leaves output 1 dark"""
        out = simulate(build_rsg_cell(), PureState.basis("in2", 5))
        assert out.path_norm2("out2") == pytest.approx(0.5, abs=1e-12)
        assert out.path_norm2("out3") == pytest.approx(0.25, abs=1e-12)
        assert out.path_norm2("out1") == pytest.approx(0.0, abs=1e-12)

    def test_invalid(self):
        with pytest.raises(BuilderError, match="at least one cell"):
            build_rsg(0)
        with pytest.raises(BuilderError, match="two-term"):
            build_rsg(2, SequenceSpec(kind="tribonacci"))


class TestPolarization:
    """Test suite for the polarization interferometers"""

    @pytest.mark.parametrize(
        "kind,c,d",
        [("plus45", 1.0, 0.0), ("minus45", 0.0, 1.0), ("H", 0.5, 0.5), ("V", 0.5, 0.5)],
    )
    def test_single_interferometer(self, kind, c, d):
        dist = probabilities(build_polarization_mz(), diagonal_state(kind))
        assert dist.probability("C") == pytest.approx(c, abs=1e-12)
        assert dist.probability("D") == pytest.approx(d, abs=1e-12)

    def test_pair(self):
        dist = probabilities(build_polarization_pair(), diagonal_state("plus45"))
        assert dist.probability("C_plus") == pytest.approx(0.5)
        assert dist.probability("D_minus") == pytest.approx(0.5)
        assert dist.probability("D_plus") == pytest.approx(0.0, abs=1e-12)

    def test_unknown_kind(self):
        with pytest.raises(BuilderError, match="unknown polarization"):
            diagonal_state("circular")

"""
Unit tests for the photon state algebra.

Tests labels, modes, sparse pure states, overlaps and two-photon states.
"""

import cmath
import math

import numpy as np
import pytest

from src.core.errors import LabelKindError, StateError
from src.optics.state import (
    Mode,
    Polarization,
    PureState,
    TwoPhotonState,
    check_label,
    fidelity,
    global_phase_distance,
    inner,
    parse_label,
    sort_modes,
)


class TestLabels:
    """Test suite for label parsing and validation"""

    def test_parse_polarization(self):
        """Test H and V parse to polarization tags"""
        assert parse_label("H") is Polarization.H
        assert parse_label("V") is Polarization.V

    def test_parse_signed_integer(self):
        """Test signed decimal labels parse to ints"""
        assert parse_label("-3") == -3
        assert parse_label("21") == 21

    def test_parse_rejects_garbage(self):
        """Test non-label tokens raise LabelKindError"""
        with pytest.raises(LabelKindError, match="not a label"):
            parse_label("x1")

    def test_check_label_bound(self):
        """Test OAM labels above the bound are rejected"""
        assert check_label(1024) == 1024
        with pytest.raises(StateError, match="exceeds bound"):
            check_label(1025)
        assert check_label(Polarization.H) is Polarization.H

    def test_check_label_rejects_float(self):
        """Test non-integer labels are rejected"""
        with pytest.raises(LabelKindError):
            check_label(1.5)


class TestMode:
    """Test suite for Mode"""

    def test_mode_is_hashable_value(self):
        """Test equal modes hash equal"""
        assert Mode("a", 3) == Mode("a", 3)
        assert len({Mode("a", 3), Mode("a", 3), Mode("b", 3)}) == 2

    def test_empty_path_rejected(self):
        """Test an empty path raises StateError"""
        with pytest.raises(StateError, match="non-empty"):
            Mode("", 1)

    def test_bool_label_rejected(self):
        """Test booleans are not OAM labels"""
        with pytest.raises(LabelKindError):
            Mode("a", True)

    def test_sort_order(self):
        """Test modes sort by path, then integers before tags"""
        modes = [Mode("b", 1), Mode("a", Polarization.H), Mode("a", 2), Mode("a", -1)]
        assert sort_modes(modes) == [Mode("a", -1), Mode("a", 2), Mode("a", Polarization.H), Mode("b", 1)]

    def test_str(self):
        """Test the path:label rendering"""
        assert str(Mode("in", 5)) == "in:5"
        assert str(Mode("in", Polarization.V)) == "in:V"


class TestPureState:
    """Test suite for PureState"""

    @pytest.fixture
    def psi(self):
        """Normalized superposition of two labels on one path"""
        return PureState.superposition("in", {3: 1.0, 5: 1.0}).normalized()

    def test_basis(self):
        """Test a basis state has unit amplitude on one mode"""
        state = PureState.basis("in", 3)
        assert state.amplitude(Mode("in", 3)) == 1.0
        assert state.amplitude(Mode("in", 4)) == 0j
        assert state.norm2() == pytest.approx(1.0)
        assert len(state) == 1

    def test_vacuum_is_falsy(self):
        """Test the vacuum has no modes"""
        assert not PureState.vacuum()
        assert PureState.vacuum().norm2() == 0.0

    def test_normalized(self, psi):
        """Test normalization yields unit norm and equal weights"""
        assert psi.norm2() == pytest.approx(1.0)
        assert abs(psi.amplitude(Mode("in", 3))) == pytest.approx(1 / math.sqrt(2))

    def test_normalize_vacuum_raises(self):
        """Test normalizing the vacuum raises StateError"""
        with pytest.raises(StateError, match="vacuum"):
            PureState.vacuum().normalized()

    def test_tiny_amplitudes_pruned(self):
        """Test amplitudes below the prune threshold are dropped"""
        state = PureState({Mode("a", 1): 1.0, Mode("a", 2): 1e-18})
        assert state.modes() == [Mode("a", 1)]

    def test_addition_cancels(self):
        """Test destructive interference removes a mode"""
        a = PureState.basis("a", 1) + PureState.basis("a", 2)
        b = PureState.basis("a", 1) - PureState.basis("a", 2)
        total = a + b
        assert total.modes() == [Mode("a", 1)]
        assert total.amplitude(Mode("a", 1)) == pytest.approx(2.0)

    def test_scalar_multiplication(self):
        """Test left and right scalar multiplication agree"""
        state = PureState.basis("a", 1)
        assert (2j * state).amplitude(Mode("a", 1)) == pytest.approx(2j)
        assert (state * 2j) == (2j * state)

    def test_inner_is_antilinear_in_first_argument(self):
        """Test <i a|b> = -i <a|b>"""
        a = PureState.basis("a", 1, 1j)
        b = PureState.basis("a", 1)
        assert a.inner(b) == pytest.approx(-1j)
        assert inner(b, a) == pytest.approx(1j)

    def test_inner_of_disjoint_states(self):
        """Test disjoint supports are orthogonal"""
        assert PureState.basis("a", 1).inner(PureState.basis("b", 1)) == 0j
        assert PureState.basis("a", 1).inner(PureState.basis("a", 2)) == 0j

    def test_moved_merges_paths(self):
        """Test renaming two paths onto one adds amplitudes"""
        state = PureState({Mode("a", 1): 0.5, Mode("b", 1): 0.5})
        moved = state.moved({"a": "c", "b": "c"})
        assert moved.paths() == {"c"}
        assert moved.amplitude(Mode("c", 1)) == pytest.approx(1.0)

    def test_restricted_and_path_norm(self, psi):
        """Test restriction keeps only the requested paths"""
        state = psi + PureState.basis("other", 1, 0.1)
        assert state.restricted(["in"]).paths() == {"in"}
        assert state.path_norm2("other") == pytest.approx(0.01)

    def test_path_content(self):
        """Test path_content relabels one path's content"""
        state = PureState({Mode("x", 2): 0.6, Mode("y", 3): 0.8})
        content = state.path_content("y")
        assert content == PureState.basis("out", 3, 0.8)

    def test_vector_round_trip(self, psi):
        """Test to_vector and from_vector agree on a basis"""
        basis = [Mode("in", 3), Mode("in", 5)]
        vector = psi.to_vector(basis)
        assert np.allclose(vector, [1 / math.sqrt(2)] * 2)
        assert PureState.from_vector(basis, vector).allclose(psi)

    def test_validate_rejects_excess_norm(self):
        """Test a squared norm above 1 raises StateError"""
        with pytest.raises(StateError, match="exceeds 1"):
            PureState.basis("a", 1, 1.1).validate()

    def test_validate_accepts_subnormalized(self):
        """Test lossy states pass validation"""
        state = PureState.basis("a", 1, 0.5)
        assert state.validate() is state

    def test_equality_and_hash(self):
        """Test equal states compare and hash equal"""
        a = PureState({Mode("a", 1): 0.5, Mode("b", 2): 0.5})
        b = PureState({Mode("b", 2): 0.5, Mode("a", 1): 0.5})
        assert a == b
        assert hash(a) == hash(b)


class TestOverlaps:
    """Test suite for phase-insensitive comparisons"""

    def test_global_phase_distance_ignores_phase_and_scale(self):
        """Test a rescaled, rephased state is at distance 0"""
        a = PureState.superposition("in", {1: 1.0, 2: -1.0})
        b = a.scaled(0.3 * cmath.exp(0.7j))
        assert global_phase_distance(a, b) == pytest.approx(0.0, abs=1e-12)

    def test_global_phase_distance_detects_relative_phase(self):
        """Test a relative phase is not removable"""
        a = PureState.superposition("in", {1: 1.0, 2: 1.0})
        b = PureState.superposition("in", {1: 1.0, 2: -1.0})
        assert global_phase_distance(a, b) > 0.5

    def test_global_phase_distance_vacuum(self):
        """Test the vacuum is only close to itself"""
        assert global_phase_distance(PureState.vacuum(), PureState.vacuum()) == 0.0
        assert global_phase_distance(PureState.vacuum(), PureState.basis("a", 1)) == 1.0

    def test_fidelity(self):
        """Test |<a|b>| for an equal superposition and a basis state"""
        a = PureState.superposition("in", {1: 1.0, 2: 1.0})
        assert fidelity(a, PureState.basis("in", 1)) == pytest.approx(1 / math.sqrt(2))


class TestTwoPhotonState:
    """Test suite for TwoPhotonState"""

    @pytest.fixture
    def product(self):
        """Product of a superposition and a basis state"""
        a = PureState.superposition("a", {1: 1.0, 2: 1.0}).normalized()
        b = PureState.basis("b", 7)
        return TwoPhotonState.product(a, b)

    def test_product_norm(self, product):
        """Test the product of normalized states is normalized"""
        assert product.norm2() == pytest.approx(1.0)
        assert len(product) == 2

    def test_swapped(self, product):
        """Test swapping exchanges the slots"""
        swapped = product.swapped()
        assert swapped.modes(0) == [Mode("b", 7)]
        assert swapped.amplitude(Mode("b", 7), Mode("a", 1)) == pytest.approx(1 / math.sqrt(2))

    def test_reduced_probabilities(self, product):
        """Test marginals of a product state"""
        probs = product.reduced_probabilities(0)
        assert probs[Mode("a", 1)] == pytest.approx(0.5)
        assert product.reduced_probabilities(1) == pytest.approx({Mode("b", 7): 1.0})

    def test_apply_local_shift(self, product):
        """Test a local map acts on one slot only"""
        shifted = product.apply_local(1, lambda m: PureState.basis(m.path, m.label + 1))
        assert shifted.modes(1) == [Mode("b", 8)]
        assert shifted.modes(0) == product.modes(0)

    def test_conditional(self):
        """Test projecting one photon of an entangled pair"""
        joint = TwoPhotonState({
            (Mode("a", 1), Mode("b", 1)): 1 / math.sqrt(2),
            (Mode("a", 2), Mode("b", 2)): 1 / math.sqrt(2),
        })
        rest = joint.conditional(0, {Mode("a", 2): 1.0})
        assert rest.modes() == [Mode("b", 2)]
        assert rest.norm2() == pytest.approx(0.5)

    def test_validate(self):
        """Test an over-normalized pair state raises"""
        joint = TwoPhotonState({(Mode("a", 1), Mode("b", 1)): 2.0})
        with pytest.raises(StateError):
            joint.validate()

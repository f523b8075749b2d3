"""Tests for measurement families, successive statistics and rms quantities."""

import math

import numpy as np
import pytest

from unclab.core.exceptions import (
    CompletenessError,
    NormalizationError,
    SpectrumError,
    UnitarityError,
    ZeroProbabilityError,
)
from unclab.core.measurement import (
    IndirectModel,
    JointOutcomeDistribution,
    MeasurementFamily,
    indirect_rms_disturbance,
    indirect_rms_error,
    modified_output_operators,
    outcome_probabilities,
    output_operator,
    post_measurement_state,
    projective_family,
    rms_disturbance,
    rms_error,
    successive_distribution,
    three_state_disturbance,
    three_state_error,
    von_neumann_model,
)
from unclab.core.quantum import (
    IDENTITY_2,
    KET_PLUS_X,
    KET_PLUS_Y,
    KET_PLUS_Z,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    bloch_state,
    identity,
    sigma_n,
    sigma_phi,
)
from unclab.utils.random_ops import random_state, random_unit_vector

CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def _grid_19():
    return np.deg2rad(np.linspace(0.0, 90.0, 19))


class TestMeasurementFamily:
    """Construction and projective families."""

    def test_projective_family_of_sigma_y(self):
        """Test that the spectral projectors of sigma_y are (I +- sigma_y)/2."""
        family = projective_family(SIGMA_Y)
        assert family.values == [1.0, -1.0]
        assert np.allclose(family.operator(1), (IDENTITY_2 + SIGMA_Y) / 2)
        assert np.allclose(family.operator(-1), (IDENTITY_2 - SIGMA_Y) / 2)

    def test_projectors_are_idempotent(self):
        """Test E^2 = E and E^dagger = E."""
        family = projective_family(sigma_phi(0.4))
        assert family.is_projective()
        for op in family.operators:
            assert np.allclose(op @ op, op)

    def test_projector_fixes_eigenvector(self):
        """Test that the +1 projector of sigma_z leaves |+z> unchanged."""
        family = projective_family(SIGMA_Z)
        assert np.allclose(family.operator(1) @ KET_PLUS_Z, KET_PLUS_Z)

    def test_non_involution_rejected(self):
        """Test that an observable without spectrum {+1, -1} is rejected."""
        with pytest.raises(SpectrumError):
            projective_family(np.diag([1.0, 0.5]))

    def test_incomplete_family_rejected(self):
        """Test that operators not resolving the identity are rejected."""
        half = (IDENTITY_2 + SIGMA_Z) / 2
        with pytest.raises(CompletenessError):
            MeasurementFamily(outcomes=((1.0, half), (-1.0, half)))

    def test_duplicate_values_rejected(self):
        """Test that outcome values must be distinct."""
        up, down = (IDENTITY_2 + SIGMA_Z) / 2, (IDENTITY_2 - SIGMA_Z) / 2
        with pytest.raises(ValueError, match="distinct"):
            MeasurementFamily(outcomes=((1.0, up), (1.0, down)))

    def test_output_operator(self):
        """Test O = sum m M_m for spectral and 0/1-valued families."""
        assert np.allclose(output_operator(projective_family(SIGMA_X)), SIGMA_X)
        up, down = (IDENTITY_2 + SIGMA_Z) / 2, (IDENTITY_2 - SIGMA_Z) / 2
        family = MeasurementFamily(outcomes=((0.0, down), (1.0, up)))
        assert np.allclose(output_operator(family), (IDENTITY_2 + SIGMA_Z) / 2)


class TestSingleMeasurement:
    """Outcome probabilities and state update."""

    def test_equatorial_measurement_of_plus_z(self):
        """Test that sigma_phi on |+z> gives 1/2 for both outcomes."""
        for phi in np.linspace(0.0, math.pi / 2, 5):
            probabilities = dict(
                outcome_probabilities(projective_family(sigma_phi(phi)), KET_PLUS_Z)
            )
            assert probabilities[1.0] == pytest.approx(0.5)
            assert probabilities[-1.0] == pytest.approx(0.5)

    def test_eigenstate_is_certain(self):
        """Test sigma_z on |+z>."""
        family = projective_family(SIGMA_Z)
        probabilities = dict(outcome_probabilities(family, KET_PLUS_Z))
        assert probabilities[1.0] == pytest.approx(1.0)
        assert probabilities[-1.0] == pytest.approx(0.0, abs=1e-15)

    def test_sigma_y_on_detuned_eigenstate(self):
        """Test p(+1) = (1 + sin phi)/2 for sigma_y on |+phi>."""
        phi = math.radians(40)
        detuned = bloch_state(math.pi / 2, phi)
        probabilities = dict(outcome_probabilities(projective_family(SIGMA_Y), detuned))
        assert probabilities[1.0] == pytest.approx((1 + math.sin(phi)) / 2)

    def test_post_measurement_state(self):
        """Test the state update rule."""
        family = projective_family(SIGMA_Z)
        assert np.allclose(post_measurement_state(family, 1, KET_PLUS_Z), KET_PLUS_Z)

        phi = math.radians(25)
        updated = post_measurement_state(
            projective_family(sigma_phi(phi)), 1, KET_PLUS_Z
        )
        overlap = np.vdot(bloch_state(math.pi / 2, phi), updated)
        assert abs(overlap) == pytest.approx(1.0)

        flipped = post_measurement_state(projective_family(SIGMA_X), -1, KET_PLUS_Y)
        overlap = np.vdot(bloch_state(math.pi / 2, math.pi), flipped)
        assert abs(overlap) == pytest.approx(1.0)

    def test_zero_probability_outcome(self):
        """Test that conditioning on an impossible outcome raises."""
        with pytest.raises(ZeroProbabilityError):
            post_measurement_state(projective_family(SIGMA_Z), -1, KET_PLUS_Z)

    def test_unnormalized_state_rejected(self):
        """Test that probabilities need a normalized state."""
        with pytest.raises(NormalizationError):
            outcome_probabilities(projective_family(SIGMA_Z), np.array([1.0, 1.0]))


class TestSuccessiveDistribution:
    """Joint statistics of sigma_phi followed by sigma_y."""

    def setup_method(self):
        """Set up the analyzer families."""
        self.second = projective_family(SIGMA_Y)

    def test_forty_degrees(self):
        """Test the reference joint probabilities at 40 degrees."""
        first = projective_family(sigma_phi(math.radians(40)))
        dist = successive_distribution(first, self.second, KET_PLUS_Z)
        same = (1 + math.sin(math.radians(40))) / 4
        opposite = (1 - math.sin(math.radians(40))) / 4
        assert np.allclose(
            dist.probabilities, [same, opposite, opposite, same], atol=1e-12
        )
        assert dist[(1, 1)] == pytest.approx(0.41070, abs=1e-5)

    def test_repeated_measurement(self):
        """Test that repeating sigma_y on |+y> always gives (+1, +1)."""
        dist = successive_distribution(self.second, self.second, KET_PLUS_Y)
        assert np.allclose(dist.probabilities, [1, 0, 0, 0], atol=1e-12)

    def test_ninety_degrees(self):
        """Test that phi = 90 degrees gives perfectly correlated outcomes."""
        first = projective_family(sigma_phi(math.pi / 2))
        dist = successive_distribution(first, self.second, KET_PLUS_Z)
        assert np.allclose(dist.probabilities, [0.5, 0, 0, 0.5], atol=1e-12)

    def test_marginals(self):
        """Test that the first marginal matches a single measurement."""
        rng = np.random.default_rng(8)
        for _ in range(20):
            psi = random_state(rng)
            first = projective_family(sigma_n(random_unit_vector(rng)))
            dist = successive_distribution(first, self.second, psi)
            single = dict(outcome_probabilities(first, psi))
            assert dist.probabilities.sum() == pytest.approx(1.0)
            assert np.allclose(dist.marginal_first(), [single[1.0], single[-1.0]])

    def test_from_joint_with_empty_row(self):
        """Test that a vanishing first-stage row keeps a uniform conditional."""
        dist = JointOutcomeDistribution.from_joint([0.7, 0.3, 0.0, 0.0])
        assert np.allclose(dist.conditional[1], [0.5, 0.5])
        assert np.allclose(dist.probabilities, [0.7, 0.3, 0.0, 0.0])

    def test_invalid_probabilities(self):
        """Test that probabilities not summing to one are rejected."""
        with pytest.raises(ValueError):
            JointOutcomeDistribution(first=[0.6, 0.6], conditional=[[1, 0], [0, 1]])


class TestRmsQuantities:
    """rms error and disturbance for the spin experiment."""

    def test_closed_forms_on_grid(self):
        """Test eps = 2 sin(phi/2) and eta = sqrt(2) cos(phi) on the 19-point grid."""
        for phi in _grid_19():
            family = projective_family(sigma_phi(phi))
            eps = rms_error(family, SIGMA_X, KET_PLUS_Z)
            eta = rms_disturbance(family, SIGMA_Y, KET_PLUS_Z)
            assert abs(eps - 2 * math.sin(phi / 2)) < 1e-10
            assert abs(eta - math.sqrt(2) * math.cos(phi)) < 1e-10

    def test_endpoints(self):
        """Test the exact measurement and the maximally disturbing endpoint."""
        exact = projective_family(SIGMA_X)
        assert rms_error(exact, SIGMA_X, KET_PLUS_Z) == pytest.approx(0.0, abs=1e-15)
        assert rms_disturbance(exact, SIGMA_Y, KET_PLUS_Z) == pytest.approx(
            math.sqrt(2)
        )
        detuned = projective_family(sigma_phi(math.pi / 2))
        assert rms_error(detuned, SIGMA_X, KET_PLUS_Z) == pytest.approx(math.sqrt(2))
        assert rms_disturbance(detuned, SIGMA_Y, KET_PLUS_Z) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_projective_error_is_operator_norm(self):
        """Test eps = ||(O - A) psi|| for projective families."""
        rng = np.random.default_rng(21)
        for _ in range(50):
            psi = random_state(rng)
            family = projective_family(sigma_n(random_unit_vector(rng)))
            out = output_operator(family)
            expected = np.linalg.norm((out - SIGMA_X) @ psi)
            assert rms_error(family, SIGMA_X, psi) == pytest.approx(expected, abs=1e-12)

    def test_modified_output_operators(self):
        """Test O_B = sin(phi) sigma_phi and O_B^(2) = I."""
        for phi in _grid_19():
            out, out_square = modified_output_operators(
                projective_family(sigma_phi(phi)), SIGMA_Y
            )
            assert np.allclose(out, math.sin(phi) * sigma_phi(phi))
            assert np.allclose(out_square, IDENTITY_2)
        out, _ = modified_output_operators(projective_family(SIGMA_X), SIGMA_Y)
        assert np.allclose(out, 0.0)

    def test_three_state_identities(self):
        """Test that the three-state forms agree with the direct definitions."""
        rng = np.random.default_rng(34)
        for _ in range(100):
            psi = random_state(rng)
            family = projective_family(sigma_n(random_unit_vector(rng)))
            assert three_state_error(family, SIGMA_X, psi) == pytest.approx(
                rms_error(family, SIGMA_X, psi), abs=1e-7
            )
            assert three_state_disturbance(family, SIGMA_Y, psi) == pytest.approx(
                rms_disturbance(family, SIGMA_Y, psi), abs=1e-7
            )

    def test_three_state_on_grid(self):
        """Test the three-state forms against the closed forms away from zero."""
        for phi in _grid_19()[1:-1]:
            family = projective_family(sigma_phi(phi))
            eps = three_state_error(family, SIGMA_X, KET_PLUS_Z)
            eta = three_state_disturbance(family, SIGMA_Y, KET_PLUS_Z)
            assert abs(eps - 2 * math.sin(phi / 2)) < 1e-10
            assert abs(eta - math.sqrt(2) * math.cos(phi)) < 1e-10

    def test_universal_relation_on_random_draws(self):
        """Test eps eta + eps sigma_b + sigma_a eta >= |<[A, B]>|/2 for spin draws."""
        from unclab.core.quantum import std_dev
        from unclab.core.relation import commutator_bound

        rng = np.random.default_rng(55)
        for _ in range(500):
            psi = random_state(rng)
            family = projective_family(sigma_n(random_unit_vector(rng)))
            eps = rms_error(family, SIGMA_X, psi)
            eta = rms_disturbance(family, SIGMA_Y, psi)
            lhs = eps * eta + eps * std_dev(psi, SIGMA_Y) + std_dev(psi, SIGMA_X) * eta
            assert lhs >= commutator_bound(psi, SIGMA_X, SIGMA_Y) - 1e-9


class TestIndirectModel:
    """rms quantities from system-probe interactions."""

    def _model(self, interaction, meter, probe=KET_PLUS_Z):
        return IndirectModel(
            system_dim=2,
            probe_dim=2,
            probe_init=probe,
            interaction=interaction,
            meter=meter,
        )

    def test_trivial_interaction(self):
        """Test U = I with a zero meter: eps = ||A psi|| = 1 and eta = 0."""
        model = self._model(identity(4), np.zeros((2, 2)))
        assert indirect_rms_error(model, SIGMA_X, KET_PLUS_Z) == pytest.approx(1.0)
        eta = indirect_rms_disturbance(model, SIGMA_Y, KET_PLUS_Z)
        assert eta == pytest.approx(0.0)

    def test_swap_is_error_free(self):
        """Test that swapping into the probe and reading sigma_x gives eps = 0."""
        rng = np.random.default_rng(2)
        for _ in range(10):
            model = self._model(SWAP, SIGMA_X, probe=random_state(rng))
            eps = indirect_rms_error(model, SIGMA_X, random_state(rng))
            assert eps == pytest.approx(0.0, abs=1e-12)

    def test_cnot(self):
        """Test the controlled-NOT example: eps(sigma_z) = 0, eta(sigma_x) = sqrt(2)."""
        model = self._model(CNOT, SIGMA_Z)
        assert indirect_rms_error(model, SIGMA_Z, KET_PLUS_Z) == pytest.approx(
            0.0, abs=1e-12
        )
        assert indirect_rms_disturbance(model, SIGMA_X, KET_PLUS_Z) == pytest.approx(
            math.sqrt(2)
        )

    def test_non_unitary_interaction(self):
        """Test that a non-unitary interaction is rejected."""
        with pytest.raises(UnitarityError):
            self._model(2 * identity(4), SIGMA_Z)

    def test_unnormalized_probe(self):
        """Test that the probe state must be normalized."""
        with pytest.raises(NormalizationError):
            self._model(identity(4), SIGMA_Z, probe=np.array([1.0, 1.0]))

    def test_von_neumann_model_consistency(self):
        """Test that the realized interaction reproduces the direct rms values."""
        rng = np.random.default_rng(13)
        for _ in range(20):
            psi = random_state(rng)
            family = projective_family(sigma_n(random_unit_vector(rng)))
            model = von_neumann_model(family)
            assert indirect_rms_error(model, SIGMA_X, psi) == pytest.approx(
                rms_error(family, SIGMA_X, psi), abs=1e-10
            )
            assert indirect_rms_disturbance(model, SIGMA_Y, psi) == pytest.approx(
                rms_disturbance(family, SIGMA_Y, psi), abs=1e-10
            )

    def test_von_neumann_model_on_plus_x(self):
        """Test that measuring sigma_x exactly on |+x> is error-free."""
        model = von_neumann_model(projective_family(SIGMA_X))
        assert indirect_rms_error(model, SIGMA_X, KET_PLUS_X) == pytest.approx(
            0.0, abs=1e-12
        )

"""Tests for the uncertainty relations and detuning sweeps."""

import math
from dataclasses import replace

import numpy as np
import pytest

from unclab.core.estimator import EstimateWithUncertainty
from unclab.core.noise import NoiseConfig
from unclab.core.quantum import (
    KET_PLUS_X,
    KET_PLUS_Z,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    bloch_state,
)
from unclab.core.relation import (
    Source,
    Verdict,
    accuracy_limit,
    analytic_record,
    classify,
    closed_form,
    commutator_bound,
    disturbance_limit,
    estimate_sets,
    exact_preparation_set,
    heisenberg_product,
    mean_reproduction,
    ozawa_sum,
    robertson_check,
    simulate_grid,
    sweep,
    validate_phi_grid,
)


def _grid(start_deg, stop_deg, count):
    return np.deg2rad(np.linspace(start_deg, stop_deg, count))


def _assert_recovered(estimate, analytic, tol):
    # Near a zero the root amplifies counting noise; compare squares there.
    if analytic > 0.1:
        assert estimate.value == pytest.approx(analytic, abs=tol)
    else:
        assert estimate.raw_square == pytest.approx(analytic ** 2, abs=tol)


class TestRelationTerms:
    """Bounds, products and sums."""

    def test_commutator_bound(self):
        """Test 1/2 |<[A, B]>| for the reference states."""
        assert commutator_bound(KET_PLUS_Z, SIGMA_X, SIGMA_Y) == pytest.approx(1.0)
        assert commutator_bound(KET_PLUS_X, SIGMA_X, SIGMA_Y) == pytest.approx(
            0.0, abs=1e-15
        )
        assert commutator_bound(KET_PLUS_Z, SIGMA_Z, SIGMA_Z) == 0.0

    def test_product_and_sum_at_forty_degrees(self):
        """Test eps*eta and the three-term sum at 40 degrees."""
        eps, eta = closed_form(math.radians(40))
        assert eps == pytest.approx(0.68404, abs=5e-6)
        assert eta == pytest.approx(1.08335, abs=5e-6)
        assert heisenberg_product(eps, eta) == pytest.approx(0.74100, abs=1e-3)
        assert ozawa_sum(eps, eta, 1.0, 1.0) == pytest.approx(2.50839, abs=1e-3)
        assert ozawa_sum(eps, eta, 1.0, 1.0) == pytest.approx(
            eps * eta + eps + eta, abs=1e-12
        )

    def test_negative_inputs_rejected(self):
        """Test that negative or non-finite terms are rejected."""
        with pytest.raises(ValueError):
            heisenberg_product(-0.1, 1.0)
        with pytest.raises(ValueError):
            ozawa_sum(0.1, 1.0, float("nan"), 1.0)

    def test_limits(self):
        """Test the accuracy and disturbance limits."""
        assert accuracy_limit(1.0, 1.0) == 1.0
        assert accuracy_limit(1.0, 0.5) == 2.0
        assert accuracy_limit(1.0, 0.0) == math.inf
        assert accuracy_limit(0.0, 0.0) == 0.0
        assert disturbance_limit(1.0, 0.25) == 4.0

    def test_limits_hold_at_endpoints(self):
        """Test the accuracy and disturbance limits at the two endpoints."""
        end = analytic_record(math.pi / 2)
        assert end.eps.value >= accuracy_limit(end.bound, end.sigma_b.value)
        start = analytic_record(0.0)
        assert start.eta.value >= disturbance_limit(start.bound, start.sigma_a.value)

    def test_mean_reproduction(self):
        """Test that O_A reproduces <A> in |+z> even though eps > 0."""
        for phi in _grid(0, 90, 19):
            reproduced, target = mean_reproduction(phi)
            assert reproduced == pytest.approx(target, abs=1e-12)
        assert closed_form(math.radians(40))[0] > 0.0

    def test_robertson_check(self):
        """Test the Robertson relation for two reference states."""
        check = robertson_check(KET_PLUS_Z, SIGMA_X, SIGMA_Y)
        assert check.lhs == pytest.approx(1.0)
        assert check.rhs == pytest.approx(1.0)
        assert check.satisfied
        check = robertson_check(KET_PLUS_X, SIGMA_X, SIGMA_Y)
        assert check.lhs == pytest.approx(0.0, abs=1e-7)
        assert check.rhs == pytest.approx(0.0, abs=1e-12)
        assert check.satisfied


class TestClassification:
    """Verdicts of the two relations."""

    def test_analytic_verdicts(self):
        """Test that the product is violated and the sum satisfied on the grid."""
        for phi in _grid(0, 90, 19):
            verdicts = analytic_record(phi).classification
            assert verdicts.heisenberg is Verdict.VIOLATED
            assert verdicts.ozawa is Verdict.SATISFIED
        assert analytic_record(0.0).classification.labels == (
            "heisenberg_violated",
            "ozawa_satisfied",
        )

    def test_commuting_observables(self):
        """Test that a zero bound satisfies both relations."""
        record = replace(analytic_record(math.radians(40)), bound=0.0)
        verdicts = classify(record)
        assert verdicts.heisenberg is Verdict.SATISFIED
        assert verdicts.ozawa is Verdict.SATISFIED

    def test_inconclusive_within_uncertainty(self):
        """Test that a product within one uncertainty of the bound is inconclusive."""
        record = replace(
            analytic_record(math.radians(40)),
            heisenberg_product=EstimateWithUncertainty(0.95, std_uncertainty=0.1),
        )
        assert classify(record).heisenberg is Verdict.INCONCLUSIVE

    def test_violation_beyond_uncertainty(self):
        """Test that a product several uncertainties below the bound is violated."""
        record = replace(
            analytic_record(math.radians(40)),
            heisenberg_product=EstimateWithUncertainty(0.7, std_uncertainty=0.05),
        )
        assert classify(record).heisenberg is Verdict.VIOLATED


class TestAnalyticSweep:
    """Sweeps from the closed forms."""

    def test_reference_angles(self, reference_angles):
        """Test the records at 0, 40 and 90 degrees."""
        result = sweep(reference_angles)
        assert result.source is Source.ANALYTIC
        assert len(result) == 3
        start, middle, end = result.records
        assert start.eps.value == pytest.approx(0.0)
        assert start.eta.value == pytest.approx(math.sqrt(2))
        assert start.heisenberg_product.value == pytest.approx(0.0)
        assert start.ozawa_sum.value == pytest.approx(math.sqrt(2))
        assert middle.heisenberg_product.value == pytest.approx(0.74100, abs=1e-3)
        assert middle.ozawa_sum.value == pytest.approx(2.50839, abs=1e-3)
        assert end.eps.value == pytest.approx(math.sqrt(2))
        assert end.eta.value == pytest.approx(0.0, abs=1e-12)
        assert end.ozawa_sum.value == pytest.approx(math.sqrt(2))
        for record in result.records:
            assert record.bound == pytest.approx(1.0)
            assert record.sigma_a.value == pytest.approx(1.0)
            assert record.sigma_b.value == pytest.approx(1.0)

    def test_dense_grid(self):
        """Test eps*eta < 1 everywhere and the three-term sum >= 1 on 1801 angles."""
        result = sweep(_grid(0, 90, 1801))
        products = np.array([r.heisenberg_product.value for r in result.records])
        sums = np.array([r.ozawa_sum.value for r in result.records])
        assert np.all(products < 1.0)
        assert 0.76 < products.max() < 0.78
        assert np.all(sums >= 1.0)

    def test_cross_terms(self):
        """Test eps*sigma(B) = 2 sin(phi/2) and sigma(A)*eta = sqrt(2) cos(phi)."""
        for record in sweep(_grid(0, 90, 19)).records:
            phi = record.phi
            assert abs(record.eps_sigma_b.value - 2 * math.sin(phi / 2)) < 1e-12
            assert abs(record.sigma_a_eta.value - math.sqrt(2) * math.cos(phi)) < 1e-12
            assert record.ozawa_sum.value - record.heisenberg_product.value == (
                pytest.approx(
                    record.eps_sigma_b.value + record.sigma_a_eta.value, abs=1e-12
                )
            )

    def test_monotone_tradeoff(self):
        """Test that eps grows and eta shrinks with the detuning angle."""
        result = sweep(_grid(0, 90, 91))
        eps = np.array([r.eps.value for r in result.records])
        eta = np.array([r.eta.value for r in result.records])
        assert np.all(np.diff(eps) >= 0)
        assert np.all(np.diff(eta) <= 0)

    def test_grid_validation(self):
        """Test that bad grids are rejected."""
        with pytest.raises(ValueError):
            validate_phi_grid([])
        with pytest.raises(ValueError):
            validate_phi_grid([0.2, 0.1])
        with pytest.raises(ValueError):
            validate_phi_grid([0.1, 0.1])
        with pytest.raises(ValueError):
            validate_phi_grid([0.0, math.radians(100)])
        with pytest.raises(ValueError):
            validate_phi_grid([0.0, float("nan")])
        grid = validate_phi_grid([-1.0, 0.5, 3.0], allow_full_range=True)
        assert grid.shape == (3,)


class TestSimulatedSweep:
    """Sweeps from simulated count tables."""

    def test_large_counts_match_analytic(self, reference_angles):
        """Test that N = 10^6 recovers the closed forms within 0.01."""
        noise = NoiseConfig(counts_per_state=1_000_000, seed=1)
        result = sweep(reference_angles, noise, n_resamples=100)
        assert result.source is Source.SIMULATED
        assert result.config == noise
        for record in result.records:
            _assert_recovered(record.eps, record.eps_analytic, 0.01)
            _assert_recovered(record.eta, record.eta_analytic, 0.01)
        assert result.records[1].eps.std_uncertainty < 0.01

    def test_nominal_counts_within_tolerance(self, reference_angles):
        """Test that N = 5400 recovers the closed forms within 0.1."""
        noise = NoiseConfig(counts_per_state=5400, seed=2)
        result = sweep(reference_angles, noise, n_resamples=200, systematic_deg=1.6)
        for record in result.records:
            _assert_recovered(record.eps, record.eps_analytic, 0.1)
            _assert_recovered(record.eta, record.eta_analytic, 0.1)
            assert record.eps.std_uncertainty > 0.0
            assert record.classification is not None

    def test_workers_do_not_change_results(self):
        """Test that threaded sweeps reproduce the serial sweep."""
        noise = NoiseConfig(counts_per_state=5400, seed=3)
        grid = _grid(0, 90, 4)
        serial = sweep(grid, noise, n_resamples=50)
        threaded = sweep(grid, noise, n_resamples=50, workers=3)
        for left, right in zip(serial.records, threaded.records):
            assert left.eps == right.eps
            assert left.eta == right.eta
            assert left.ozawa_sum == right.ozawa_sum

    def test_contrast_correction(self):
        """Test that a C = 0.96 run is corrected back toward the closed forms."""
        noise = NoiseConfig(counts_per_state=1_000_000, contrast=0.96, seed=4)
        phi = [math.radians(40)]
        corrected = sweep(phi, noise, n_resamples=50).records[0]
        raw = sweep(phi, noise, n_resamples=50, correct_contrast=False).records[0]
        assert corrected.eps.value == pytest.approx(corrected.eps_analytic, abs=0.01)
        assert abs(raw.eps.value - raw.eps_analytic) > abs(
            corrected.eps.value - corrected.eps_analytic
        )

    def test_simulate_grid(self):
        """Test that simulated runs match the sweep's count streams."""
        noise = NoiseConfig(counts_per_state=100, seed=6)
        runs = simulate_grid(_grid(0, 90, 3), noise)
        assert [run.phi for run in runs] == pytest.approx(list(_grid(0, 90, 3)))
        again = simulate_grid(_grid(0, 90, 3), noise)
        for first, second in zip(runs, again):
            assert np.array_equal(first.tables["+z"].counts, second.tables["+z"].counts)


class TestEstimateSets:
    """Records for externally supplied tables."""

    def test_exact_intensities(self):
        """Test that exact intensities reproduce the closed forms."""
        sets = [exact_preparation_set(phi, total=1e6) for phi in _grid(0, 90, 3)]
        result = estimate_sets(list(reversed(sets)), n_resamples=10, seed=0)
        assert result.source is Source.SIMULATED
        assert list(result.phis) == pytest.approx(list(_grid(0, 90, 3)))
        middle = result.records[1]
        assert middle.eps.value == pytest.approx(middle.eps_analytic, abs=1e-9)
        assert middle.eta.value == pytest.approx(middle.eta_analytic, abs=1e-9)

    def test_normalized_intensities_classified(self, caplog):
        """Test that normalized intensities carry no statistical uncertainty."""
        sets = [exact_preparation_set(phi) for phi in _grid(0, 90, 3)]
        result = estimate_sets(sets, n_resamples=10, seed=0)
        for record in result.records:
            assert record.eps.std_uncertainty == 0.0
            assert record.eta.std_uncertainty == 0.0
            assert record.classification.heisenberg is Verdict.VIOLATED
            assert record.classification.ozawa is Verdict.SATISFIED
        assert "normalized intensities" in caplog.text

    def test_normalized_intensities_keep_systematic_term(self):
        """Test that the misalignment term still applies to exact intensities."""
        sets = [exact_preparation_set(phi) for phi in _grid(0, 90, 3)]
        result = estimate_sets(sets, n_resamples=0, systematic_deg=1.6)
        middle = result.records[1]
        assert 0.0 < middle.eta.std_uncertainty < 0.05
        assert middle.classification.heisenberg is Verdict.VIOLATED
        assert middle.classification.ozawa is Verdict.SATISFIED

    def test_needs_angles(self):
        """Test that tables without a detuning angle are rejected."""
        prep = exact_preparation_set(0.3)
        anonymous = type(prep)(tables=prep.tables, phi=None)
        with pytest.raises(ValueError, match="detuning angle"):
            estimate_sets([anonymous])
        with pytest.raises(ValueError):
            estimate_sets([])

    def test_other_states(self):
        """Test that the bound vanishes on the equator of the Bloch sphere."""
        psi = bloch_state(math.pi / 2, 0.7)
        assert commutator_bound(psi, SIGMA_X, SIGMA_Y) == pytest.approx(0.0, abs=1e-12)

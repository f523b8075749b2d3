"""Uncertainty relations for error, disturbance and standard deviation.

For A = sigma_x, B = sigma_y and |psi> = |+z>, the bound is
1/2 |<[A, B]>| = 1. The product eps*eta drops below it for every detuning
angle, while the sum eps*eta + eps*sigma(B) + sigma(A)*eta never does.
:func:`sweep` produces records for a grid of detuning angles, either from
the closed forms or from simulated count data.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .config import Config
from .counts import CountTable, PreparedState, StatePreparationSet
from .estimator import (
    EstimateWithUncertainty,
    combine_systematic,
    epsilon_from_counts,
    eta_from_counts,
    sigma_from_marginals,
    uncertainty_spreads,
)
from .measurement import output_operator, projective_family
from .noise import (
    ExperimentRun,
    NoiseConfig,
    ideal_probabilities,
    run_experiment,
    substream,
)
from .quantum import (
    KET_PLUS_Z,
    SIGMA_X,
    SIGMA_Y,
    ComplexMatrix,
    StateVector,
    commutator,
    expectation,
    sigma_phi,
    std_dev,
)

logger = logging.getLogger(__name__)

_GRID_SLACK = 1e-12
_EXPERIMENT_STREAM = 0
_BOOTSTRAP_STREAM = 1


class Verdict(str, Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"
    INCONCLUSIVE = "inconclusive"


class Source(str, Enum):
    ANALYTIC = "analytic"
    SIMULATED = "simulated"


class Classification(NamedTuple):
    """Verdicts for the Heisenberg-type product and the three-term sum."""

    heisenberg: Verdict
    ozawa: Verdict

    @property
    def labels(self) -> Tuple[str, str]:
        return (
            f"heisenberg_{self.heisenberg.value}",
            f"ozawa_{self.ozawa.value}",
        )


class RobertsonCheck(NamedTuple):
    lhs: float
    rhs: float
    satisfied: bool


@dataclass(frozen=True)
class ErrorDisturbanceRecord:
    """All quantities of one detuning setting."""

    phi: float
    eps: EstimateWithUncertainty
    eta: EstimateWithUncertainty
    sigma_a: EstimateWithUncertainty
    sigma_b: EstimateWithUncertainty
    bound: float
    heisenberg_product: EstimateWithUncertainty
    ozawa_sum: EstimateWithUncertainty
    eps_sigma_b: EstimateWithUncertainty
    sigma_a_eta: EstimateWithUncertainty
    eps_analytic: float
    eta_analytic: float
    source: Source
    classification: Optional[Classification] = None

    @property
    def phi_deg(self) -> float:
        return math.degrees(self.phi)


@dataclass(frozen=True)
class SweepResult:
    """Records ordered by detuning angle.

    ``config`` holds the noise settings of a simulated sweep and is None for
    analytic sweeps and for estimates from external count files.
    """

    records: Tuple[ErrorDisturbanceRecord, ...]
    config: Optional[NoiseConfig] = None
    source: Source = Source.ANALYTIC

    @property
    def phis(self) -> np.ndarray:
        return np.array([record.phi for record in self.records])

    def __len__(self) -> int:
        return len(self.records)


def commutator_bound(psi: StateVector, a: ComplexMatrix, b: ComplexMatrix) -> float:
    """Return 1/2 |<psi|[A, B]|psi>|."""
    return 0.5 * abs(expectation(psi, commutator(a, b)))


def _require_nonnegative(**values: float) -> None:
    for name, value in values.items():
        if value < 0 or not math.isfinite(value):
            raise ValueError(f"{name} must be finite and nonnegative, got {value}")


def heisenberg_product(eps: float, eta: float) -> float:
    """Return eps*eta, the left side of the Heisenberg-type relation."""
    _require_nonnegative(eps=eps, eta=eta)
    return eps * eta


def ozawa_sum(eps: float, eta: float, sigma_a: float, sigma_b: float) -> float:
    """Return eps*eta + eps*sigma(B) + sigma(A)*eta."""
    _require_nonnegative(eps=eps, eta=eta, sigma_a=sigma_a, sigma_b=sigma_b)
    return eps * eta + eps * sigma_b + sigma_a * eta


def accuracy_limit(bound: float, sigma_b: float) -> float:
    """Smallest error allowed to a measurement that does not disturb B."""
    if sigma_b == 0.0:
        return math.inf if bound > 0.0 else 0.0
    return bound / sigma_b


def disturbance_limit(bound: float, sigma_a: float) -> float:
    """Smallest disturbance allowed to an error-free measurement of A."""
    if sigma_a == 0.0:
        return math.inf if bound > 0.0 else 0.0
    return bound / sigma_a


def mean_reproduction(
    phi: float, psi: StateVector = KET_PLUS_Z
) -> Tuple[float, float]:
    """Return (<psi|O_A|psi>, <psi|A|psi>) for the detuned sigma_phi apparatus."""
    out = output_operator(projective_family(sigma_phi(phi)))
    return expectation(psi, out).real, expectation(psi, SIGMA_X).real


def robertson_check(
    psi: StateVector,
    a: ComplexMatrix,
    b: ComplexMatrix,
    tol: float = Config.AUDIT_TOL,
) -> RobertsonCheck:
    """Evaluate sigma(A) sigma(B) against the commutator bound."""
    lhs = std_dev(psi, a) * std_dev(psi, b)
    rhs = commutator_bound(psi, a, b)
    return RobertsonCheck(lhs=lhs, rhs=rhs, satisfied=lhs >= rhs - tol)


def _verdict(value: EstimateWithUncertainty, bound: float, tol: float) -> Verdict:
    margin = value.value - bound
    if value.std_uncertainty > 0.0 and abs(margin) <= value.std_uncertainty:
        return Verdict.INCONCLUSIVE
    return Verdict.SATISFIED if margin >= -tol else Verdict.VIOLATED


def classify(
    record: ErrorDisturbanceRecord, tol: float = Config.AUDIT_TOL
) -> Classification:
    """Compare both expressions with the bound.

    Analytic records use the fixed tolerance. Simulated records within one
    propagated standard uncertainty of the bound are inconclusive.
    """
    classification = Classification(
        heisenberg=_verdict(record.heisenberg_product, record.bound, tol),
        ozawa=_verdict(record.ozawa_sum, record.bound, tol),
    )
    if Verdict.INCONCLUSIVE in classification:
        logger.warning(
            "Inconclusive classification at phi=%.2f deg: %s",
            record.phi_deg,
            "/".join(classification.labels),
        )
    return classification


def closed_form(phi: float) -> Tuple[float, float]:
    """(eps, eta) = (2 sin(phi/2), sqrt(2) cos(phi)) for the spin experiment."""
    return 2.0 * abs(math.sin(phi / 2.0)), math.sqrt(2.0) * abs(math.cos(phi))


def _exact(value: float) -> EstimateWithUncertainty:
    return EstimateWithUncertainty(value=value)


def analytic_record(phi: float) -> ErrorDisturbanceRecord:
    """Record from the closed forms with sigma(A) = sigma(B) = bound = 1."""
    eps, eta = closed_form(phi)
    sigma_a = std_dev(KET_PLUS_Z, SIGMA_X)
    sigma_b = std_dev(KET_PLUS_Z, SIGMA_Y)
    record = ErrorDisturbanceRecord(
        phi=phi,
        eps=_exact(eps),
        eta=_exact(eta),
        sigma_a=_exact(sigma_a),
        sigma_b=_exact(sigma_b),
        bound=commutator_bound(KET_PLUS_Z, SIGMA_X, SIGMA_Y),
        heisenberg_product=_exact(heisenberg_product(eps, eta)),
        ozawa_sum=_exact(ozawa_sum(eps, eta, sigma_a, sigma_b)),
        eps_sigma_b=_exact(eps * sigma_b),
        sigma_a_eta=_exact(sigma_a * eta),
        eps_analytic=eps,
        eta_analytic=eta,
        source=Source.ANALYTIC,
    )
    return replace(record, classification=classify(record))


def _derived(values: Mapping[str, Any]) -> Dict[str, Any]:
    eps, eta = values["eps"], values["eta"]
    sigma_a, sigma_b = values["sigma_a"], values["sigma_b"]
    return {
        "eps": eps,
        "eta": eta,
        "sigma_a": sigma_a,
        "sigma_b": sigma_b,
        "heisenberg_product": eps * eta,
        "eps_sigma_b": eps * sigma_b,
        "sigma_a_eta": sigma_a * eta,
        "ozawa_sum": eps * eta + eps * sigma_b + sigma_a * eta,
    }


def _unsampled_spread(
    prep: StatePreparationSet,
    points: Mapping[str, float],
    eps: EstimateWithUncertainty,
    eta: EstimateWithUncertainty,
) -> Dict[str, float]:
    if not all(table.is_integral for table in prep.tables.values()):
        logger.warning(
            "Counts are normalized intensities; reporting no statistical "
            "uncertainty"
        )
        return {name: 0.0 for name in points}
    # Linear propagation with sigma(A), sigma(B) treated as exact.
    eps_unc, eta_unc = eps.std_uncertainty, eta.std_uncertainty
    sigma_a, sigma_b = points["sigma_a"], points["sigma_b"]
    return {
        "eps": eps_unc,
        "eta": eta_unc,
        "sigma_a": 0.0,
        "sigma_b": 0.0,
        "heisenberg_product": math.hypot(eta.value * eps_unc, eps.value * eta_unc),
        "eps_sigma_b": sigma_b * eps_unc,
        "sigma_a_eta": sigma_a * eta_unc,
        "ozawa_sum": math.hypot(
            (eta.value + sigma_b) * eps_unc, (eps.value + sigma_a) * eta_unc
        ),
    }


def simulated_record(
    prep: StatePreparationSet,
    n_resamples: int = Config.DEFAULT_BOOTSTRAP,
    rng: Optional[np.random.Generator] = None,
    systematic_deg: float = 0.0,
    contrast: Optional[float] = None,
    normalization: float = Config.AUX_NORMALIZATION,
) -> ErrorDisturbanceRecord:
    """Estimate one record from the four count tables of a detuning setting.

    Uncertainties of eps, eta and every product come from the same bootstrap
    replicates, so correlations between factors are kept; the systematic
    half spread at +-``systematic_deg`` is added in quadrature. With
    ``n_resamples=0`` the delta method is used; normalized intensities
    carry no statistical uncertainty.
    """
    if prep.phi is None:
        raise ValueError("Count tables must carry their detuning angle")
    phi = prep.phi
    eps = epsilon_from_counts(prep, normalization, contrast)
    eta = eta_from_counts(prep, normalization, contrast)
    sigma_a, sigma_b = sigma_from_marginals(prep[PreparedState.PSI], contrast)
    points = _derived(
        {"eps": eps.value, "eta": eta.value, "sigma_a": sigma_a, "sigma_b": sigma_b}
    )
    integral = all(table.is_integral for table in prep.tables.values())
    if n_resamples > 0 and integral:
        spread = uncertainty_spreads(
            prep, n_resamples, rng, systematic_deg, contrast, derive=_derived
        )
    else:
        spread = combine_systematic(
            _unsampled_spread(prep, points, eps, eta),
            phi,
            systematic_deg,
            derive=_derived,
        )

    def estimate(name: str) -> EstimateWithUncertainty:
        return EstimateWithUncertainty(
            value=float(points[name]), std_uncertainty=spread[name]
        )

    eps_analytic, eta_analytic = closed_form(phi)
    record = ErrorDisturbanceRecord(
        phi=phi,
        eps=replace(eps, std_uncertainty=spread["eps"]),
        eta=replace(eta, std_uncertainty=spread["eta"]),
        sigma_a=estimate("sigma_a"),
        sigma_b=estimate("sigma_b"),
        bound=commutator_bound(KET_PLUS_Z, SIGMA_X, SIGMA_Y),
        heisenberg_product=estimate("heisenberg_product"),
        ozawa_sum=estimate("ozawa_sum"),
        eps_sigma_b=estimate("eps_sigma_b"),
        sigma_a_eta=estimate("sigma_a_eta"),
        eps_analytic=eps_analytic,
        eta_analytic=eta_analytic,
        source=Source.SIMULATED,
    )
    return replace(record, classification=classify(record))


def validate_phi_grid(
    phi_grid: Sequence[float], allow_full_range: bool = False
) -> np.ndarray:
    """Return the grid as an array; it must be nonempty and strictly increasing."""
    grid = np.asarray(phi_grid, dtype=float).reshape(-1)
    if grid.size == 0:
        raise ValueError("Detuning grid must not be empty")
    if not np.all(np.isfinite(grid)):
        raise ValueError("Detuning grid must contain finite angles")
    if np.any(np.diff(grid) <= 0.0):
        raise ValueError("Detuning grid must be strictly increasing")
    if not allow_full_range and (
        grid[0] < -_GRID_SLACK or grid[-1] > math.pi / 2.0 + _GRID_SLACK
    ):
        raise ValueError("Detuning angles must lie between 0 and 90 degrees")
    return grid


def experiment_stream(seed: int, index: int) -> np.random.Generator:
    """Generator that simulates the counts of grid point ``index``."""
    return substream(seed, index, _EXPERIMENT_STREAM)


def simulate_grid(
    phi_grid: Sequence[float], noise: NoiseConfig, allow_full_range: bool = False
) -> List[ExperimentRun]:
    """Count tables for every grid point, drawn from the per-point streams."""
    grid = validate_phi_grid(phi_grid, allow_full_range)
    return [
        run_experiment(float(phi), noise, experiment_stream(noise.seed, index))
        for index, phi in enumerate(grid)
    ]


def _simulated_point(
    index: int,
    phi: float,
    noise: NoiseConfig,
    n_resamples: int,
    systematic_deg: float,
    contrast: Optional[float],
) -> ErrorDisturbanceRecord:
    run = run_experiment(phi, noise, experiment_stream(noise.seed, index))
    logger.debug("Estimating sweep point %d at phi=%.2f deg", index, math.degrees(phi))
    return simulated_record(
        run.tables,
        n_resamples=n_resamples,
        rng=substream(noise.seed, index, _BOOTSTRAP_STREAM),
        systematic_deg=systematic_deg,
        contrast=contrast,
    )


def sweep(
    phi_grid: Sequence[float],
    noise: Optional[NoiseConfig] = None,
    n_resamples: int = Config.DEFAULT_BOOTSTRAP,
    systematic_deg: float = 0.0,
    correct_contrast: bool = True,
    workers: int = 1,
    allow_full_range: bool = False,
) -> SweepResult:
    """One record per detuning angle (radians).

    Without ``noise`` the closed forms are used. With ``noise`` each point
    is simulated and estimated with its own random streams derived from
    (seed, index), so results do not depend on ``workers``.
    """
    grid = validate_phi_grid(phi_grid, allow_full_range)
    if noise is None:
        records = tuple(analytic_record(float(phi)) for phi in grid)
        logger.info("Analytic sweep over %d detuning angles", len(records))
        return SweepResult(records=records)

    contrast = noise.contrast if correct_contrast and noise.contrast < 1.0 else None

    def point(item: Tuple[int, float]) -> ErrorDisturbanceRecord:
        index, phi = item
        return _simulated_point(
            index, float(phi), noise, n_resamples, systematic_deg, contrast
        )

    items = list(enumerate(grid))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            records = tuple(executor.map(point, items))
    else:
        records = tuple(point(item) for item in items)
    logger.info(
        "Simulated sweep over %d detuning angles with %d counts per state",
        len(records),
        noise.counts_per_state,
    )
    return SweepResult(records=records, config=noise, source=Source.SIMULATED)


def estimate_sets(
    sets: Sequence[StatePreparationSet],
    n_resamples: int = Config.DEFAULT_BOOTSTRAP,
    seed: Optional[int] = None,
    systematic_deg: float = 0.0,
    contrast: Optional[float] = None,
) -> SweepResult:
    """Records for externally supplied count tables, ordered by detuning angle."""
    if not sets:
        raise ValueError("No count tables to estimate")
    if any(prep.phi is None for prep in sets):
        raise ValueError("Count tables must carry their detuning angle")
    ordered = sorted(sets, key=lambda prep: prep.phi or 0.0)
    validate_phi_grid([prep.phi for prep in ordered], allow_full_range=True)
    if seed is None:
        seed = Config.default_seed()
    records = tuple(
        simulated_record(
            prep,
            n_resamples=n_resamples,
            rng=substream(seed, index, _BOOTSTRAP_STREAM),
            systematic_deg=systematic_deg,
            contrast=contrast,
        )
        for index, prep in enumerate(ordered)
    )
    return SweepResult(records=records, source=Source.SIMULATED)


def exact_preparation_set(phi: float, total: float = 1.0) -> StatePreparationSet:
    """Noise-free tables holding ``total`` times the exact joint probabilities."""
    tables = {
        state: CountTable(counts=total * ideal_probabilities(phi, state).probabilities)
        for state in PreparedState
    }
    return StatePreparationSet(tables=tables, phi=phi)

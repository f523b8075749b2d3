"""Three-state estimation of error and disturbance from count tables.

For |psi> = |+z>, A = sigma_x and B = sigma_y the squares are

    eps^2 = 2 + <O_A>_{+z} + <O_A>_{-z} - 2 <O_A>_{+x}
    eta^2 = 2 + <O_B>_{+z} + <O_B>_{-z} - 2 <O_B>_{+y}

where <O_A> is read off the first analyzer and <O_B> off the second. The
factor 2 is ||(A+I)|psi>||^2 = ||(B+I)|psi>||^2; it is confirmed
experimentally by spin-rotation measurements and can be overridden for
sensitivity studies. The -z table serves for both B|psi> = i|-z> and
A|psi> = |-z> because the global phase drops out.

Optional contrast correction: with per-analyzer visibility C the first
analyzer signal is attenuated by C and the second by C^2, so means are
divided accordingly before use.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Mapping, Optional, Tuple

import numpy as np

from .config import Config
from .counts import CountTable, PreparedState, StatePreparationSet
from .exceptions import CountTableError, DataCorruptionError
from .noise import apply_misalignment

logger = logging.getLogger(__name__)

_MAX_RMS = 2.0


@dataclass(frozen=True)
class EstimateWithUncertainty:
    """An estimate, its standard uncertainty and clamp bookkeeping."""

    value: float
    std_uncertainty: float = 0.0
    raw_square: Optional[float] = None
    clamped: bool = False

    def __post_init__(self) -> None:
        if not math.isfinite(self.std_uncertainty) or self.std_uncertainty < 0:
            raise ValueError(f"Invalid uncertainty {self.std_uncertainty}")


def _first_signal(counts: np.ndarray) -> np.ndarray:
    cells = np.asarray(counts, dtype=float)
    plus = cells[..., 0] + cells[..., 1]
    minus = cells[..., 2] + cells[..., 3]
    return (plus - minus) / cells.sum(axis=-1)


def _second_signal(counts: np.ndarray) -> np.ndarray:
    cells = np.asarray(counts, dtype=float)
    plus = cells[..., 0] + cells[..., 2]
    minus = cells[..., 1] + cells[..., 3]
    return (plus - minus) / cells.sum(axis=-1)


def _require_counts(table: CountTable) -> None:
    if table.total <= 0:
        raise CountTableError("Count table has zero total")


def mean_OA(table: CountTable, contrast: Optional[float] = None) -> float:
    """<O_A> from the first-analyzer marginal, optionally contrast corrected."""
    _require_counts(table)
    mean = float(_first_signal(table.counts))
    if contrast is not None:
        mean = mean / contrast
    return float(np.clip(mean, -1.0, 1.0))


def mean_OB(table: CountTable, contrast: Optional[float] = None) -> float:
    """<O_B> from the second-analyzer marginal, optionally contrast corrected."""
    _require_counts(table)
    mean = float(_second_signal(table.counts))
    if contrast is not None:
        mean = mean / contrast ** 2
    return float(np.clip(mean, -1.0, 1.0))


def _square(
    mean_psi: np.ndarray,
    mean_moved: np.ndarray,
    mean_aux: np.ndarray,
    normalization: float,
) -> np.ndarray:
    return 2.0 + mean_psi + mean_moved - normalization * mean_aux


def _delta_variance(mean: float, total: float, gain: float) -> float:
    # Multinomial variance of a +-1 mean, scaled by the contrast correction.
    return max(1.0 - mean ** 2, 0.0) / total / gain ** 2


def _finish(square: float, variance: float, name: str) -> EstimateWithUncertainty:
    spread = math.sqrt(max(variance, 0.0))
    clamped = False
    if square < 0.0:
        if square < -Config.CORRUPTION_SIGMAS * spread:
            raise DataCorruptionError(
                f"{name}^2 = {square:.4g} is more than {Config.CORRUPTION_SIGMAS:g} "
                f"standard deviations below zero"
            )
        logger.warning("Clamping negative %s^2 = %.3g to zero", name, square)
        clamped = True
    value = math.sqrt(max(square, 0.0))
    if value > _MAX_RMS:
        logger.warning("Clamping %s = %.4g to %.1f", name, value, _MAX_RMS)
        value = _MAX_RMS
        clamped = True
    if value * value > spread:
        uncertainty = spread / (2.0 * value)
    else:
        uncertainty = math.sqrt(spread)
    return EstimateWithUncertainty(
        value=value, std_uncertainty=uncertainty, raw_square=square, clamped=clamped
    )


def _estimate(
    prep: StatePreparationSet,
    aux: PreparedState,
    signal: Callable[[np.ndarray], np.ndarray],
    gain: float,
    normalization: float,
    name: str,
) -> EstimateWithUncertainty:
    tables = [prep[PreparedState.PSI], prep[PreparedState.A_PSI], prep[aux]]
    for table in tables:
        _require_counts(table)
    raw = [float(signal(table.counts)) for table in tables]
    means = [float(np.clip(mean / gain, -1.0, 1.0)) for mean in raw]
    square = float(_square(means[0], means[1], means[2], normalization))
    weights = (1.0, 1.0, normalization ** 2)
    variance = sum(
        weight * _delta_variance(mean, table.total, gain)
        for weight, mean, table in zip(weights, raw, tables)
    )
    return _finish(square, variance, name)


def epsilon_from_counts(
    prep: StatePreparationSet,
    normalization: float = Config.AUX_NORMALIZATION,
    contrast: Optional[float] = None,
) -> EstimateWithUncertainty:
    """eps(A) from the +z, -z and +x tables; uncertainty by the delta method."""
    gain = contrast if contrast is not None else 1.0
    return _estimate(
        prep, PreparedState.X_AUX, _first_signal, gain, normalization, "eps"
    )


def eta_from_counts(
    prep: StatePreparationSet,
    normalization: float = Config.AUX_NORMALIZATION,
    contrast: Optional[float] = None,
) -> EstimateWithUncertainty:
    """eta(B) from the +z, -z and +y tables; uncertainty by the delta method."""
    gain = contrast ** 2 if contrast is not None else 1.0
    return _estimate(
        prep, PreparedState.Y_AUX, _second_signal, gain, normalization, "eta"
    )


def sigma_from_marginals(
    table: CountTable, contrast: Optional[float] = None
) -> Tuple[float, float]:
    """(sigma(A), sigma(B)) as sqrt(1 - mean^2) of the two analyzer marginals."""
    first = mean_OA(table, contrast)
    second = mean_OB(table, contrast)
    return math.sqrt(1.0 - first ** 2), math.sqrt(1.0 - second ** 2)


def _quantities(
    counts: Dict[PreparedState, np.ndarray],
    contrast: Optional[float],
    normalization: float,
) -> Dict[str, np.ndarray]:
    """Vectorized eps, eta, sigma(A), sigma(B) over stacked count arrays."""
    first_gain = contrast if contrast is not None else 1.0
    second_gain = contrast ** 2 if contrast is not None else 1.0
    first = {
        state: np.clip(_first_signal(array) / first_gain, -1.0, 1.0)
        for state, array in counts.items()
    }
    second = {
        state: np.clip(_second_signal(array) / second_gain, -1.0, 1.0)
        for state, array in counts.items()
    }
    eps_square = _square(
        first[PreparedState.PSI],
        first[PreparedState.A_PSI],
        first[PreparedState.X_AUX],
        normalization,
    )
    eta_square = _square(
        second[PreparedState.PSI],
        second[PreparedState.A_PSI],
        second[PreparedState.Y_AUX],
        normalization,
    )
    return {
        "eps": np.clip(np.sqrt(np.clip(eps_square, 0.0, None)), 0.0, _MAX_RMS),
        "eta": np.clip(np.sqrt(np.clip(eta_square, 0.0, None)), 0.0, _MAX_RMS),
        "sigma_a": np.sqrt(1.0 - first[PreparedState.PSI] ** 2),
        "sigma_b": np.sqrt(1.0 - second[PreparedState.PSI] ** 2),
    }


def point_quantities(
    prep: StatePreparationSet,
    contrast: Optional[float] = None,
    normalization: float = Config.AUX_NORMALIZATION,
) -> Dict[str, float]:
    """eps, eta, sigma(A) and sigma(B) of one preparation set."""
    for table in prep.tables.values():
        _require_counts(table)
    counts = {state: table.counts for state, table in prep.tables.items()}
    return {
        name: float(value)
        for name, value in _quantities(counts, contrast, normalization).items()
    }


def bootstrap_replicates(
    prep: StatePreparationSet,
    n_resamples: int = Config.DEFAULT_BOOTSTRAP,
    rng: Optional[np.random.Generator] = None,
    contrast: Optional[float] = None,
    normalization: float = Config.AUX_NORMALIZATION,
) -> Dict[str, np.ndarray]:
    """Replicates of eps, eta, sigma(A), sigma(B) under multinomial resampling.

    Each prepared state gets its own child stream, so replicates do not
    depend on the order tables are processed in.
    """
    if n_resamples < 1:
        raise ValueError(f"Need at least one resample, got {n_resamples}")
    if rng is None:
        rng = np.random.default_rng(Config.default_seed())
    streams = rng.spawn(len(PreparedState))
    resampled = {}
    for stream, state in zip(streams, PreparedState):
        table = prep[state]
        _require_counts(table)
        if not table.is_integral:
            raise CountTableError(
                f"Bootstrap needs raw integer counts; table {state.value} is normalized"
            )
        total = int(round(table.total))
        resampled[state] = stream.multinomial(
            total, table.normalized(), size=n_resamples
        )
    logger.debug("Drew %d bootstrap resamples per prepared state", n_resamples)
    return _quantities(resampled, contrast, normalization)


def exact_quantities(phi: float, delta_deg: float = 0.0) -> Dict[str, float]:
    """Quantities from exact probabilities under a coherent misalignment."""
    tables = {
        state: CountTable(
            counts=apply_misalignment(phi, delta_deg, state).probabilities
        )
        for state in PreparedState
    }
    return point_quantities(StatePreparationSet(tables=tables, phi=phi))


Derive = Callable[[Mapping[str, Any]], Dict[str, Any]]


def systematic_half_spread(
    phi: float, delta_deg: float, derive: Optional[Derive] = None
) -> Dict[str, float]:
    """Half the spread of each quantity between misalignments +delta and -delta.

    ``derive`` maps the four base quantities to further ones (products,
    sums) before the spread is taken.
    """
    upper = exact_quantities(phi, delta_deg)
    lower = exact_quantities(phi, -delta_deg)
    if derive is not None:
        upper, lower = derive(upper), derive(lower)
    return {name: abs(upper[name] - lower[name]) / 2.0 for name in upper}


def combine_systematic(
    spread: Dict[str, float],
    phi: Optional[float],
    systematic_deg: float,
    derive: Optional[Derive] = None,
) -> Dict[str, float]:
    """Add the +-``systematic_deg`` half spread to ``spread`` in quadrature."""
    if not systematic_deg:
        return dict(spread)
    if phi is None:
        raise ValueError("Systematic term needs the detuning angle of the set")
    systematic = systematic_half_spread(phi, systematic_deg, derive)
    return {name: math.hypot(value, systematic[name]) for name, value in spread.items()}


def uncertainty_spreads(
    prep: StatePreparationSet,
    n_resamples: int = Config.DEFAULT_BOOTSTRAP,
    rng: Optional[np.random.Generator] = None,
    systematic_deg: float = 0.0,
    contrast: Optional[float] = None,
    derive: Optional[Derive] = None,
) -> Dict[str, float]:
    """Bootstrap standard deviation of every quantity plus the systematic term."""
    replicates = bootstrap_replicates(prep, n_resamples, rng, contrast)
    if derive is not None:
        replicates = derive(replicates)
    spread = {name: float(np.std(values)) for name, values in replicates.items()}
    return combine_systematic(spread, prep.phi, systematic_deg, derive)


def propagate_uncertainty(
    prep: StatePreparationSet,
    n_resamples: int = Config.DEFAULT_BOOTSTRAP,
    rng: Optional[np.random.Generator] = None,
    systematic_deg: float = 0.0,
    contrast: Optional[float] = None,
) -> Tuple[float, float]:
    """Uncertainties of eps and eta, bootstrap and systematic in quadrature."""
    spread = uncertainty_spreads(prep, n_resamples, rng, systematic_deg, contrast)
    return spread["eps"], spread["eta"]

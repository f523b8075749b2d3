"""Virtual successive-measurement experiment with counting noise.

The apparatus is modelled at the level of states and angles: preparation
is a pair of spin rotations, apparatus M1 is the projective sigma_phi
measurement and apparatus M2 the projective sigma_y measurement. Noise
enters through a coherent angle offset, analyzer visibility and finite
counting statistics, in that order.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .config import Config
from .counts import CountTable, PreparedState, StatePreparationSet
from .measurement import (
    JointOutcomeDistribution,
    projective_family,
    successive_distribution,
)
from .quantum import (
    KET_PLUS_Z,
    SIGMA_Y,
    StateVector,
    as_state,
    sigma_phi,
    spin_rotation,
)

logger = logging.getLogger(__name__)

StateLabel = Union[str, PreparedState]

# Bloch polar and azimuthal angles of each prepared state.
_PREPARATION_ANGLES = {
    PreparedState.PSI: (0.0, 0.0),
    PreparedState.A_PSI: (math.pi, 0.0),
    PreparedState.X_AUX: (math.pi / 2.0, 0.0),
    PreparedState.Y_AUX: (math.pi / 2.0, math.pi / 2.0),
}

_M2_FAMILY = projective_family(SIGMA_Y)


class NoiseConfig(BaseModel):
    """Counting, visibility and alignment settings of a virtual run."""

    model_config = ConfigDict(frozen=True)

    counts_per_state: int = Field(default=Config.DEFAULT_COUNTS, ge=1)
    contrast: float = Field(default=Config.DEFAULT_CONTRAST, gt=0.0, le=1.0)
    misalign_deg: float = Field(
        default=Config.DEFAULT_MISALIGN_DEG, allow_inf_nan=False
    )
    seed: int = Field(default_factory=Config.default_seed, ge=0, lt=2**64)
    poisson: bool = False

    @model_validator(mode="after")
    def _poisson_needs_counts(self) -> "NoiseConfig":
        # A Poisson table is empty with probability exp(-counts_per_state).
        if self.poisson and self.counts_per_state < Config.MIN_POISSON_COUNTS:
            raise ValueError(
                f"Poisson counts need counts_per_state >= {Config.MIN_POISSON_COUNTS}"
            )
        return self


@dataclass(frozen=True, eq=False)
class ExperimentRun:
    """Noisy count tables of one detuning setting plus the distributions behind them."""

    phi: float
    noise: NoiseConfig
    tables: StatePreparationSet
    true_probabilities: Dict[PreparedState, JointOutcomeDistribution]
    model_probabilities: Dict[PreparedState, JointOutcomeDistribution]


def substream(seed: int, index: int, purpose: int = 0) -> np.random.Generator:
    """Independent generator for sweep point ``index``, independent of run order."""
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(index, purpose))
    return np.random.default_rng(sequence)


def prepared_state(label: StateLabel, delta: float = 0.0) -> StateVector:
    """Prepared input state; ``delta`` (radians) tilts both Bloch angles coherently.

    Preparation is a rotation about y by the polar angle followed by Larmor
    precession about z by the azimuth, so the result matches
    ``bloch_state`` up to a global phase.
    """
    polar, azimuth = _PREPARATION_ANGLES[PreparedState.parse(label)]
    rotation = spin_rotation("z", azimuth + delta) @ spin_rotation("y", polar + delta)
    return as_state(rotation @ KET_PLUS_Z, normalized=True)


def ideal_probabilities(phi: float, prepared: StateLabel) -> JointOutcomeDistribution:
    """Noise-free joint statistics of M1 (sigma_phi) followed by M2 (sigma_y)."""
    return apply_misalignment(phi, 0.0, prepared)


def apply_misalignment(
    phi: float, delta_deg: float, prepared: StateLabel
) -> JointOutcomeDistribution:
    """Joint statistics with detuning and preparation shifted by ``delta_deg``."""
    delta = math.radians(delta_deg)
    first = projective_family(sigma_phi(phi + delta))
    return successive_distribution(first, _M2_FAMILY, prepared_state(prepared, delta))


def apply_contrast(
    distribution: JointOutcomeDistribution, contrast: float
) -> JointOutcomeDistribution:
    """Mix each analyzer stage toward a fair coin with visibility ``contrast``."""
    if not 0.0 < contrast <= 1.0:
        raise ValueError(f"Contrast must lie in (0, 1], got {contrast}")
    floor = (1.0 - contrast) / 2.0
    return JointOutcomeDistribution(
        first=contrast * distribution.first + floor,
        conditional=contrast * distribution.conditional + floor,
    )


def sample_counts(
    distribution: JointOutcomeDistribution,
    total: int,
    rng: np.random.Generator,
    poisson: bool = False,
) -> CountTable:
    """Draw one count table of size ``total`` (multinomial, or Poisson per cell)."""
    if total < 1:
        raise ValueError(f"Total counts must be at least 1, got {total}")
    probabilities = distribution.probabilities
    probabilities = probabilities / probabilities.sum()
    if poisson:
        counts = rng.poisson(total * probabilities)
    else:
        counts = rng.multinomial(total, probabilities)
    return CountTable(counts=counts)


def run_experiment(
    phi: float, noise: NoiseConfig, rng: Optional[np.random.Generator] = None
) -> ExperimentRun:
    """Simulate the 16 intensities of one detuning setting."""
    if rng is None:
        rng = np.random.default_rng(noise.seed)
    tables = {}
    true_probabilities = {}
    model_probabilities = {}
    for state in PreparedState:
        true_probabilities[state] = ideal_probabilities(phi, state)
        misaligned = apply_misalignment(phi, noise.misalign_deg, state)
        model_probabilities[state] = apply_contrast(misaligned, noise.contrast)
        tables[state] = sample_counts(
            model_probabilities[state], noise.counts_per_state, rng, noise.poisson
        )
    logger.debug(
        "Simulated phi=%.4f rad with N=%d, C=%.3f, delta=%.2f deg",
        phi,
        noise.counts_per_state,
        noise.contrast,
        noise.misalign_deg,
    )
    return ExperimentRun(
        phi=phi,
        noise=noise,
        tables=StatePreparationSet(tables=tables, phi=phi),
        true_probabilities=true_probabilities,
        model_probabilities=model_probabilities,
    )

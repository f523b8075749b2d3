"""Command implementations behind the ``unclab`` entry point."""

import logging
import math
from pathlib import Path
from typing import Callable, Dict, Literal, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from ..core.audit import run_audits
from ..core.config import Config
from ..core.noise import NoiseConfig
from ..core.relation import estimate_sets, simulate_grid, sweep
from ..utils.data_io import (
    SIMULATE_EXACT_COLUMNS,
    audit_frame,
    read_counts,
    simulate_frame,
    sweep_frame,
    write_output,
)

logger = logging.getLogger(__name__)


def parse_phi_grid(spec: str) -> np.ndarray:
    """Parse ``START:STOP:COUNT`` (degrees, inclusive endpoints)."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"Grid must look like START:STOP:COUNT, got {spec!r}")
    try:
        start, stop = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError as exc:
        raise ValueError(f"Invalid grid {spec!r}: {exc}") from exc
    if not (math.isfinite(start) and math.isfinite(stop)):
        raise ValueError(f"Grid endpoints must be finite, got {spec!r}")
    if count < 1:
        raise ValueError(f"Grid needs at least one point, got {count}")
    if count == 1 and start != stop:
        raise ValueError("A one-point grid needs START equal to STOP")
    return np.linspace(start, stop, count)


class RunConfig(BaseModel):
    """Validated parameters of one command invocation."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    command: Literal["sweep", "simulate", "estimate", "audit"]
    phi: str = Config.DEFAULT_PHI_GRID
    analytic: bool = False
    counts: int = Field(default=Config.DEFAULT_COUNTS, ge=1)
    contrast: Optional[float] = Field(default=None, gt=0.0, le=1.0)
    misalign_deg: float = Field(
        default=Config.DEFAULT_MISALIGN_DEG, allow_inf_nan=False
    )
    poisson: bool = False
    seed: int = Field(default_factory=Config.default_seed, ge=0, lt=2**64)
    bootstrap: int = Field(default=Config.DEFAULT_BOOTSTRAP, ge=1)
    systematic_deg: float = Field(default=Config.SYSTEMATIC_DEG, ge=0.0)
    workers: int = Field(default=1, ge=1)
    draws: int = Field(default=Config.DEFAULT_AUDIT_DRAWS, ge=1)
    indirect_draws: int = Field(default=Config.DEFAULT_INDIRECT_DRAWS, ge=1)
    shards: int = Field(default=Config.DEFAULT_SHARDS, ge=1)
    input: Optional[Path] = None
    output: Optional[Path] = None
    format: Literal["csv", "json"] = "csv"

    def noise(self) -> NoiseConfig:
        return NoiseConfig(
            counts_per_state=self.counts,
            contrast=self.contrast if self.contrast is not None else 1.0,
            misalign_deg=self.misalign_deg,
            seed=self.seed,
            poisson=self.poisson,
        )

    def phi_grid(self) -> np.ndarray:
        """Grid in radians."""
        return np.deg2rad(parse_phi_grid(self.phi))


def _write(
    frame: pd.DataFrame, config: RunConfig, exact_columns: Sequence[str] = ()
) -> None:
    write_output(
        frame,
        config.output,
        config.format,
        config.model_dump(mode="json"),
        exact_columns,
    )


def cmd_sweep(config: RunConfig) -> int:
    grid = config.phi_grid()
    if config.analytic:
        result = sweep(grid)
    else:
        result = sweep(
            grid,
            config.noise(),
            n_resamples=config.bootstrap,
            systematic_deg=config.systematic_deg,
            workers=config.workers,
        )
    _write(sweep_frame(result), config)
    return 0


def cmd_simulate(config: RunConfig) -> int:
    grid_deg = parse_phi_grid(config.phi)
    runs = simulate_grid(np.deg2rad(grid_deg), config.noise())
    logger.info("Simulated %d detuning setting(s)", len(runs))
    _write(simulate_frame(runs, grid_deg), config, SIMULATE_EXACT_COLUMNS)
    return 0


def cmd_estimate(config: RunConfig) -> int:
    if config.input is None:
        raise ValueError("estimate needs an input count file")
    sets = read_counts(config.input)
    result = estimate_sets(
        sets,
        n_resamples=config.bootstrap,
        seed=config.seed,
        systematic_deg=config.systematic_deg,
        contrast=config.contrast,
    )
    for record in result.records:
        logger.info(
            "phi=%.2f deg: eps=%.5f +- %.5f, eta=%.5f +- %.5f",
            record.phi_deg,
            record.eps.value,
            record.eps.std_uncertainty,
            record.eta.value,
            record.eta.std_uncertainty,
        )
    _write(sweep_frame(result), config)
    return 0


def cmd_audit(config: RunConfig) -> int:
    reports = run_audits(
        draws=config.draws,
        indirect_draws=config.indirect_draws,
        seed=config.seed,
        shards=config.shards,
    )
    _write(audit_frame(reports), config)
    failed = [report.kind for report in reports if not report.passed]
    if failed:
        logger.error("Relation violated beyond tolerance in: %s", ", ".join(failed))
        return 1
    return 0


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "audit": cmd_audit,
}

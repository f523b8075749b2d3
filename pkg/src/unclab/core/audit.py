"""Randomized audits of the uncertainty relations.

Draws are split into shards. Shard ``k`` uses child ``k`` of
``SeedSequence(seed)``, shards run on a thread pool, and results are merged
in shard order, so a report depends only on (draws, seed, shards).
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from ..utils.random_ops import (
    random_hermitian,
    random_involution,
    random_state,
    random_unit_vector,
    random_unitary,
)
from .config import Config
from .measurement import (
    IndirectModel,
    indirect_rms_disturbance,
    indirect_rms_error,
    projective_family,
    rms_disturbance,
    rms_error,
    von_neumann_model,
)
from .quantum import SIGMA_X, SIGMA_Y, StateVector, sigma_n, std_dev
from .relation import commutator_bound, robertson_check

logger = logging.getLogger(__name__)


class _Draw(NamedTuple):
    slack: float
    heisenberg_violated: bool
    parameters: Dict[str, Any]


@dataclass(frozen=True)
class AuditReport:
    """Summary of one randomized audit."""

    kind: str
    draws: int
    min_slack: float
    violations: int
    heisenberg_violations: int = 0
    worst_case: Dict[str, Any] = field(default_factory=dict)
    tol: float = Config.AUDIT_TOL

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _state_parameters(psi: StateVector) -> List[List[float]]:
    return [[float(a.real), float(a.imag)] for a in np.asarray(psi)]


def _shard_sizes(draws: int, shards: int) -> List[int]:
    base, extra = divmod(draws, shards)
    return [base + (1 if k < extra else 0) for k in range(shards)]


def _run_sharded(
    kind: str,
    draw: Callable[[np.random.Generator], _Draw],
    draws: int,
    seed: int,
    shards: int,
    tol: float,
) -> AuditReport:
    if draws < 1:
        raise ValueError(f"Audit needs at least one draw, got {draws}")
    if shards < 1:
        raise ValueError(f"Audit needs at least one shard, got {shards}")
    shards = min(shards, draws)
    sizes = _shard_sizes(draws, shards)
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    children = np.random.SeedSequence(seed).spawn(shards)

    def run_shard(k: int) -> Tuple[Optional[_Draw], int, int, int]:
        rng = np.random.default_rng(children[k])
        worst: Optional[_Draw] = None
        worst_index = -1
        violations = heisenberg = 0
        for i in range(sizes[k]):
            result = draw(rng)
            if result.slack < -tol:
                violations += 1
            if result.heisenberg_violated:
                heisenberg += 1
            if worst is None or result.slack < worst.slack:
                worst, worst_index = result, int(offsets[k]) + i
        return worst, worst_index, violations, heisenberg

    with ThreadPoolExecutor(max_workers=shards) as executor:
        results = list(executor.map(run_shard, range(shards)))

    worst: Optional[_Draw] = None
    worst_index = -1
    for shard_worst, index, _, _ in results:
        if shard_worst is None:
            continue
        if worst is None or shard_worst.slack < worst.slack:
            worst, worst_index = shard_worst, index
    assert worst is not None
    report = AuditReport(
        kind=kind,
        draws=draws,
        min_slack=worst.slack,
        violations=sum(result[2] for result in results),
        heisenberg_violations=sum(result[3] for result in results),
        worst_case={"draw": worst_index, **worst.parameters},
        tol=tol,
    )
    log = logger.info if report.passed else logger.error
    log(
        "%s audit: %d draws, min slack %.3e, %d violations, %d Heisenberg-type",
        kind,
        draws,
        report.min_slack,
        report.violations,
        report.heisenberg_violations,
    )
    return report


def _universal_slack(
    eps: float, eta: float, sigma_a: float, sigma_b: float, bound: float, tol: float
) -> Tuple[float, bool]:
    lhs = eps * eta + eps * sigma_b + sigma_a * eta
    return lhs - bound, eps * eta < bound - tol


def audit_projective(
    draws: int = Config.DEFAULT_AUDIT_DRAWS,
    seed: Optional[int] = None,
    shards: int = Config.DEFAULT_SHARDS,
    tol: float = Config.AUDIT_TOL,
) -> AuditReport:
    """Projective sigma_n measurements on random qubit states.

    A = sigma_x and B = sigma_y; the detuning direction n is uniform on the
    Bloch sphere.
    """
    if seed is None:
        seed = Config.default_seed()

    def draw(rng: np.random.Generator) -> _Draw:
        psi = random_state(rng)
        direction = random_unit_vector(rng)
        family = projective_family(sigma_n(direction))
        eps = rms_error(family, SIGMA_X, psi)
        eta = rms_disturbance(family, SIGMA_Y, psi)
        bound = commutator_bound(psi, SIGMA_X, SIGMA_Y)
        slack, heisenberg = _universal_slack(
            eps,
            eta,
            std_dev(psi, SIGMA_X),
            std_dev(psi, SIGMA_Y),
            bound,
            tol,
        )
        return _Draw(
            slack,
            heisenberg,
            {
                "psi": _state_parameters(psi),
                "direction": [float(x) for x in direction],
                "eps": eps,
                "eta": eta,
                "bound": bound,
            },
        )

    return _run_sharded("projective", draw, draws, seed, shards, tol)


def audit_indirect(
    draws: int = Config.DEFAULT_INDIRECT_DRAWS,
    seed: Optional[int] = None,
    shards: int = Config.DEFAULT_SHARDS,
    tol: float = Config.AUDIT_TOL,
) -> AuditReport:
    """Random 4x4 interactions with random qubit probe states and meters."""
    if seed is None:
        seed = Config.default_seed()

    def draw(rng: np.random.Generator) -> _Draw:
        psi = random_state(rng)
        model = IndirectModel(
            system_dim=2,
            probe_dim=2,
            probe_init=random_state(rng),
            interaction=random_unitary(rng, 4),
            meter=random_hermitian(rng),
        )
        eps = indirect_rms_error(model, SIGMA_X, psi)
        eta = indirect_rms_disturbance(model, SIGMA_Y, psi)
        bound = commutator_bound(psi, SIGMA_X, SIGMA_Y)
        slack, heisenberg = _universal_slack(
            eps,
            eta,
            std_dev(psi, SIGMA_X),
            std_dev(psi, SIGMA_Y),
            bound,
            tol,
        )
        return _Draw(
            slack,
            heisenberg,
            {"psi": _state_parameters(psi), "eps": eps, "eta": eta, "bound": bound},
        )

    return _run_sharded("indirect", draw, draws, seed, shards, tol)


def audit_robertson(
    draws: int = 1000,
    seed: Optional[int] = None,
    shards: int = Config.DEFAULT_SHARDS,
    tol: float = Config.AUDIT_TOL,
) -> AuditReport:
    """sigma(A) sigma(B) against the commutator bound for random +-1 observables."""
    if seed is None:
        seed = Config.default_seed()

    def draw(rng: np.random.Generator) -> _Draw:
        psi = random_state(rng)
        a, b = random_involution(rng), random_involution(rng)
        check = robertson_check(psi, a, b, tol)
        return _Draw(
            check.lhs - check.rhs,
            False,
            {"psi": _state_parameters(psi), "lhs": check.lhs, "rhs": check.rhs},
        )

    return _run_sharded("robertson", draw, draws, seed, shards, tol)


def audit_formalism_consistency(
    draws: int = 100,
    seed: Optional[int] = None,
    shards: int = 1,
    tol: float = Config.AUDIT_TOL,
) -> AuditReport:
    """Projective families versus their von Neumann models.

    The slack of a draw is minus the larger of the eps and eta deviations,
    so a violation is a deviation above ``tol``.
    """
    if seed is None:
        seed = Config.default_seed()

    def draw(rng: np.random.Generator) -> _Draw:
        psi = random_state(rng)
        direction = random_unit_vector(rng)
        family = projective_family(sigma_n(direction))
        model = von_neumann_model(family)
        deviation = max(
            abs(
                rms_error(family, SIGMA_X, psi)
                - indirect_rms_error(model, SIGMA_X, psi)
            ),
            abs(
                rms_disturbance(family, SIGMA_Y, psi)
                - indirect_rms_disturbance(model, SIGMA_Y, psi)
            ),
        )
        return _Draw(
            -deviation,
            False,
            {"psi": _state_parameters(psi), "direction": [float(x) for x in direction]},
        )

    return _run_sharded("formalism", draw, draws, seed, shards, tol)


def run_audits(
    draws: int = Config.DEFAULT_AUDIT_DRAWS,
    indirect_draws: int = Config.DEFAULT_INDIRECT_DRAWS,
    seed: Optional[int] = None,
    shards: int = Config.DEFAULT_SHARDS,
) -> List[AuditReport]:
    """The audits behind the ``audit`` command, in report order."""
    if seed is None:
        seed = Config.default_seed()
    if draws < 1 or indirect_draws < 1:
        raise ValueError("Audit draw counts must be at least 1")
    reports = [
        audit_projective(draws, seed, shards),
        audit_indirect(indirect_draws, seed, shards),
        audit_robertson(min(draws, 1000), seed, shards),
        audit_formalism_consistency(min(draws, 100), seed),
    ]
    return reports

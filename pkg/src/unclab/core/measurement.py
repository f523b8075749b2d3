"""Measurement-operator families, rms error and rms disturbance.

Two formalisms are supported. A :class:`MeasurementFamily` holds operators
{M_m} with outcome values m, and error/disturbance follow from

    eps(A)^2 = sum_m ||M_m (m - A) psi||^2
    eta(B)^2 = sum_m ||[M_m, B] psi||^2

An :class:`IndirectModel` holds a system-probe interaction U, a probe state
xi and a meter observable M, and error/disturbance are the norms of
[U^dagger (I x M) U - A x I] psi xi and [U^dagger (B x I) U - B x I] psi xi.
:func:`von_neumann_model` turns a family into an equivalent model.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .config import Config
from .exceptions import (
    CompletenessError,
    DimensionError,
    SpectrumError,
    UnitarityError,
    ZeroProbabilityError,
)
from .quantum import (
    ComplexMatrix,
    StateVector,
    as_operator,
    as_state,
    identity,
    is_hermitian,
    is_unitary,
    matrix_element,
    require_hermitian,
    require_normalized,
    require_same_dim,
    tensor,
)

logger = logging.getLogger(__name__)

# Joint outcomes of two successive +-1 measurements, in table order.
OUTCOMES: Tuple[Tuple[int, int], ...] = ((1, 1), (1, -1), (-1, 1), (-1, -1))
_SIGN_INDEX = {1: 0, -1: 1}
_ZERO_PROBABILITY = 1e-14


@dataclass(frozen=True, eq=False)
class MeasurementFamily:
    """Outcome values paired with measurement operators resolving the identity."""

    outcomes: Tuple[Tuple[float, ComplexMatrix], ...]

    def __post_init__(self) -> None:
        if not self.outcomes:
            raise ValueError("A measurement family needs at least one outcome")
        checked = tuple(
            (float(value), as_operator(operator)) for value, operator in self.outcomes
        )
        values = [value for value, _ in checked]
        if len(set(values)) != len(values):
            raise ValueError(f"Outcome values must be distinct, got {values}")
        dim = require_same_dim(*(operator for _, operator in checked))
        gram = sum(np.conj(op).T @ op for _, op in checked)
        deviation = float(np.max(np.abs(gram - np.eye(dim))))
        if deviation > Config.COMPLETENESS_TOL:
            raise CompletenessError(
                f"sum M_m^dagger M_m deviates from identity by {deviation:.3e}"
            )
        object.__setattr__(self, "outcomes", checked)

    @property
    def values(self) -> List[float]:
        return [value for value, _ in self.outcomes]

    @property
    def operators(self) -> List[ComplexMatrix]:
        return [operator for _, operator in self.outcomes]

    @property
    def dim(self) -> int:
        return self.outcomes[0][1].shape[0]

    def operator(self, value: float) -> ComplexMatrix:
        """Return the measurement operator of outcome ``value``."""
        for candidate, operator in self.outcomes:
            if candidate == float(value):
                return operator
        raise ValueError(f"Unknown outcome value {value}; known {self.values}")

    def is_projective(self, tol: float = Config.COMPLETENESS_TOL) -> bool:
        """True when every operator is an orthogonal projection."""
        return all(
            is_hermitian(op, tol) and np.max(np.abs(op @ op - op)) <= tol
            for op in self.operators
        )


@dataclass(frozen=True, eq=False)
class IndirectModel:
    """Measuring process: probe state xi, interaction U and meter M."""

    system_dim: int
    probe_dim: int
    probe_init: StateVector
    interaction: ComplexMatrix
    meter: ComplexMatrix

    def __post_init__(self) -> None:
        probe_init = as_state(self.probe_init, normalized=True)
        interaction = as_operator(self.interaction)
        meter = as_operator(self.meter, hermitian=True)
        total = self.system_dim * self.probe_dim
        if probe_init.shape[0] != self.probe_dim or meter.shape[0] != self.probe_dim:
            raise DimensionError("Probe state and meter must live on the probe space")
        if interaction.shape[0] != total:
            raise DimensionError(
                f"Interaction must act on a {total}-dimensional space, "
                f"got {interaction.shape[0]}"
            )
        if not is_unitary(interaction):
            raise UnitarityError("Interaction operator must be unitary")
        object.__setattr__(self, "probe_init", probe_init)
        object.__setattr__(self, "interaction", interaction)
        object.__setattr__(self, "meter", meter)


@dataclass(frozen=True, eq=False)
class JointOutcomeDistribution:
    """Joint statistics of two successive +-1 measurements.

    ``first`` holds p(m1) for m1 = +1, -1 and ``conditional`` holds
    p(m2 | m1) with rows m1 and columns m2 in the same order. Keeping the
    conditionals lets noise models act on each analyzer stage separately,
    even where p(m1) vanishes.
    """

    first: np.ndarray
    conditional: np.ndarray

    def __post_init__(self) -> None:
        first = np.asarray(self.first, dtype=float).reshape(2)
        conditional = np.asarray(self.conditional, dtype=float).reshape(2, 2)
        for name, values, sums in (
            ("first-stage", first, [first.sum()]),
            ("conditional", conditional, conditional.sum(axis=1)),
        ):
            if np.any(values < -Config.PROBABILITY_TOL) or not np.all(
                np.isfinite(values)
            ):
                raise ValueError(f"Invalid {name} probabilities: {values}")
            if np.any(np.abs(np.asarray(sums) - 1.0) > Config.PROBABILITY_TOL):
                raise ValueError(f"{name} probabilities must sum to 1, got {sums}")
        first = np.clip(first, 0.0, None)
        conditional = np.clip(conditional, 0.0, None)
        first.setflags(write=False)
        conditional.setflags(write=False)
        object.__setattr__(self, "first", first)
        object.__setattr__(self, "conditional", conditional)

    @classmethod
    def from_joint(cls, probabilities: np.ndarray) -> "JointOutcomeDistribution":
        """Build from four joint probabilities in OUTCOMES order."""
        joint = np.asarray(probabilities, dtype=float).reshape(2, 2)
        first = joint.sum(axis=1)
        conditional = np.full((2, 2), 0.5)
        for row in range(2):
            if first[row] > _ZERO_PROBABILITY:
                conditional[row] = joint[row] / first[row]
        return cls(first=first, conditional=conditional)

    @property
    def probabilities(self) -> np.ndarray:
        """Joint probabilities p(m1, m2) in OUTCOMES order."""
        return (self.first[:, None] * self.conditional).reshape(4)

    def __getitem__(self, outcome: Tuple[int, int]) -> float:
        row, column = _SIGN_INDEX[outcome[0]], _SIGN_INDEX[outcome[1]]
        return float(self.first[row] * self.conditional[row, column])

    def marginal_first(self) -> np.ndarray:
        return self.first.copy()

    def marginal_second(self) -> np.ndarray:
        return self.first @ self.conditional


def projective_family(observable: ComplexMatrix) -> MeasurementFamily:
    """Spectral family {(+1, (I+O)/2), (-1, (I-O)/2)} of a +-1-valued observable."""
    observable = as_operator(observable)
    require_hermitian(observable)
    dim = observable.shape[0]
    square = observable @ observable
    if np.max(np.abs(square - np.eye(dim))) > Config.NORMALIZATION_TOL:
        raise SpectrumError("Observable must have spectrum {+1, -1} (O^2 = I)")
    eye = np.eye(dim)
    return MeasurementFamily(
        outcomes=((1.0, (eye + observable) / 2.0), (-1.0, (eye - observable) / 2.0))
    )


def output_operator(family: MeasurementFamily) -> ComplexMatrix:
    """Return O = sum_m m M_m."""
    return as_operator(sum(value * op for value, op in family.outcomes))


def outcome_probabilities(
    family: MeasurementFamily, psi: StateVector
) -> List[Tuple[float, float]]:
    """Return (value, ||M_m psi||^2) for every outcome."""
    require_same_dim(family.operators[0], psi)
    require_normalized(psi)
    return [
        (value, float(np.linalg.norm(op @ psi) ** 2)) for value, op in family.outcomes
    ]


def post_measurement_state(
    family: MeasurementFamily, value: float, psi: StateVector
) -> StateVector:
    """Return M_m psi / ||M_m psi|| for the recorded outcome ``value``."""
    operator = family.operator(value)
    require_same_dim(operator, psi)
    image = operator @ np.asarray(psi)
    weight = float(np.linalg.norm(image))
    if weight ** 2 <= _ZERO_PROBABILITY:
        raise ZeroProbabilityError(f"Outcome {value} has zero probability")
    return as_state(image / weight)


def _require_sign_outcomes(family: MeasurementFamily) -> None:
    if sorted(family.values) != [-1.0, 1.0]:
        raise ValueError(f"Expected outcomes {{+1, -1}}, got {family.values}")


def _second_stage(
    first_op: ComplexMatrix, second: MeasurementFamily, psi: StateVector
) -> Tuple[float, np.ndarray]:
    image = first_op @ np.asarray(psi)
    weight = float(np.vdot(image, image).real)
    conditional = np.empty(2)
    if weight > _ZERO_PROBABILITY:
        state = image / math.sqrt(weight)
        for value, op in second.outcomes:
            conditional[_SIGN_INDEX[int(value)]] = np.linalg.norm(op @ state) ** 2
    else:
        # Impossible branch: use the apparatus response to a maximally mixed input.
        scale = float(np.trace(np.conj(first_op).T @ first_op).real)
        for value, op in second.outcomes:
            if scale > 0.0:
                chain = op @ first_op
                conditional[_SIGN_INDEX[int(value)]] = (
                    np.trace(np.conj(chain).T @ chain).real / scale
                )
            else:
                conditional[_SIGN_INDEX[int(value)]] = 0.5
    return weight, conditional / conditional.sum()


def successive_distribution(
    first: MeasurementFamily, second: MeasurementFamily, psi: StateVector
) -> JointOutcomeDistribution:
    """Joint statistics p(m1, m2) = ||M2_{m2} M1_{m1} psi||^2."""
    _require_sign_outcomes(first)
    _require_sign_outcomes(second)
    require_same_dim(first.operators[0], second.operators[0], psi)
    require_normalized(psi)
    marginal = np.empty(2)
    conditional = np.empty((2, 2))
    for value, op in first.outcomes:
        row = _SIGN_INDEX[int(value)]
        marginal[row], conditional[row] = _second_stage(op, second, psi)
    return JointOutcomeDistribution(
        first=marginal / marginal.sum(), conditional=conditional
    )


def rms_error(
    family: MeasurementFamily, target: ComplexMatrix, psi: StateVector
) -> float:
    """rms error eps(A) from the measurement operators."""
    require_same_dim(family.operators[0], target, psi)
    require_normalized(psi)
    eye = np.eye(family.dim)
    square = sum(
        np.linalg.norm(op @ ((value * eye - target) @ psi)) ** 2
        for value, op in family.outcomes
    )
    return math.sqrt(float(square))


def rms_disturbance(
    family: MeasurementFamily, disturbed: ComplexMatrix, psi: StateVector
) -> float:
    """rms disturbance eta(B) from the measurement operators."""
    require_same_dim(family.operators[0], disturbed, psi)
    require_normalized(psi)
    square = sum(
        np.linalg.norm((op @ disturbed - disturbed @ op) @ psi) ** 2
        for op in family.operators
    )
    return math.sqrt(float(square))


def modified_output_operators(
    family: MeasurementFamily, disturbed: ComplexMatrix
) -> Tuple[ComplexMatrix, ComplexMatrix]:
    """Return O_B = sum E B E and O_B^(2) = sum E B^2 E for a projective family."""
    if not family.is_projective():
        raise ValueError("Modified output operators need a projective family")
    require_same_dim(family.operators[0], disturbed)
    disturbed = np.asarray(disturbed)
    square = disturbed @ disturbed
    first = sum(op @ disturbed @ op for op in family.operators)
    second = sum(op @ square @ op for op in family.operators)
    return as_operator(first), as_operator(second)


def _three_state_square(
    observable: ComplexMatrix,
    out: ComplexMatrix,
    out_square: ComplexMatrix,
    psi: StateVector,
) -> float:
    observable = np.asarray(observable)
    shifted = observable + np.eye(observable.shape[0])
    moved = observable @ psi
    raised = shifted @ psi
    value = (
        matrix_element(psi, observable @ observable, psi)
        + matrix_element(psi, out_square, psi)
        + matrix_element(psi, out, psi)
        + matrix_element(moved, out, moved)
        - matrix_element(raised, out, raised)
    )
    return value.real


def three_state_error(
    family: MeasurementFamily, target: ComplexMatrix, psi: StateVector
) -> float:
    """eps(A) from mean values of O_A in psi, A psi and (A+I) psi."""
    if not family.is_projective():
        raise ValueError("The three-state identity needs a projective family")
    require_same_dim(family.operators[0], target, psi)
    require_normalized(psi)
    out = output_operator(family)
    out_square = sum(value ** 2 * op for value, op in family.outcomes)
    return math.sqrt(max(_three_state_square(target, out, out_square, psi), 0.0))


def three_state_disturbance(
    family: MeasurementFamily, disturbed: ComplexMatrix, psi: StateVector
) -> float:
    """eta(B) from mean values of O_B in psi, B psi and (B+I) psi."""
    out, out_square = modified_output_operators(family, disturbed)
    require_same_dim(out, psi)
    require_normalized(psi)
    return math.sqrt(max(_three_state_square(disturbed, out, out_square, psi), 0.0))


def _joint_state(model: IndirectModel, psi: StateVector) -> np.ndarray:
    if np.asarray(psi).shape[0] != model.system_dim:
        raise DimensionError(
            f"System state has dimension {np.asarray(psi).shape[0]}, "
            f"model expects {model.system_dim}"
        )
    require_normalized(psi)
    return np.asarray(tensor(psi, model.probe_init))


def indirect_rms_error(
    model: IndirectModel, target: ComplexMatrix, psi: StateVector
) -> float:
    """eps(A) = ||[U^dagger (I x M) U - A x I] psi xi||."""
    require_same_dim(target, np.eye(model.system_dim))
    joint = _joint_state(model, psi)
    unitary = np.asarray(model.interaction)
    heisenberg = (
        np.conj(unitary).T @ np.kron(np.eye(model.system_dim), model.meter) @ unitary
    )
    deviation = heisenberg - np.kron(target, np.eye(model.probe_dim))
    return float(np.linalg.norm(deviation @ joint))


def indirect_rms_disturbance(
    model: IndirectModel, disturbed: ComplexMatrix, psi: StateVector
) -> float:
    """eta(B) = ||[U^dagger (B x I) U - B x I] psi xi||."""
    require_same_dim(disturbed, np.eye(model.system_dim))
    joint = _joint_state(model, psi)
    unitary = np.asarray(model.interaction)
    lifted = np.kron(disturbed, np.eye(model.probe_dim))
    deviation = np.conj(unitary).T @ lifted @ unitary - lifted
    return float(np.linalg.norm(deviation @ joint))


def von_neumann_model(family: MeasurementFamily) -> IndirectModel:
    """Realize a measurement family as a system-probe interaction.

    The probe has one level per outcome and starts in |0>. The interaction
    extends the isometry psi x |0> -> sum_m M_m psi x |m> to a unitary; the
    meter reads the outcome value of the probe level.
    """
    dim = family.dim
    count = len(family.outcomes)
    isometry = sum(
        np.kron(op, np.eye(count)[:, [k]]) for k, op in enumerate(family.operators)
    )
    _, _, vh = np.linalg.svd(np.conj(isometry).T)
    complement = np.conj(vh[dim:]).T
    unitary = np.zeros((dim * count, dim * count), dtype=np.complex128)
    used = [i * count for i in range(dim)]
    free = [j for j in range(dim * count) if j not in used]
    unitary[:, used] = isometry
    unitary[:, free] = complement
    probe_init = np.zeros(count, dtype=np.complex128)
    probe_init[0] = 1.0
    logger.debug("Built von Neumann model with probe dimension %d", count)
    return IndirectModel(
        system_dim=dim,
        probe_dim=count,
        probe_init=probe_init,
        interaction=unitary,
        meter=np.diag(np.asarray(family.values, dtype=np.complex128)),
    )

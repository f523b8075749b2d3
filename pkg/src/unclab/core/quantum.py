"""Dense complex linear algebra for small spin systems.

States are 1-D ``complex128`` arrays and operators are square 2-D
``complex128`` arrays. Every constructor here returns a read-only array, so
values can be shared freely between callers and threads. States may be
unnormalized; functions that need a unit vector say so and check it.
"""

import logging
import math
from typing import Sequence, Union

import numpy as np
import numpy.typing as npt

from .config import Config
from .exceptions import (
    DimensionError,
    HermiticityError,
    NormalizationError,
    NumericalCorruptionError,
)

logger = logging.getLogger(__name__)

ComplexScalar = complex
StateVector = npt.NDArray[np.complex128]
ComplexMatrix = npt.NDArray[np.complex128]
ArrayLike = Union[Sequence, np.ndarray]

_PAULI_ENTRIES = {
    "x": [[0, 1], [1, 0]],
    "y": [[0, -1j], [1j, 0]],
    "z": [[1, 0], [0, -1]],
}


def _freeze(array: np.ndarray) -> np.ndarray:
    frozen = np.array(array, dtype=np.complex128, copy=True)
    frozen.setflags(write=False)
    return frozen


def as_state(amplitudes: ArrayLike, normalized: bool = False) -> StateVector:
    """Build a state vector, optionally requiring unit norm."""
    psi = np.asarray(amplitudes, dtype=np.complex128)
    if psi.ndim != 1 or psi.size < 1:
        raise DimensionError(f"State must be a non-empty 1-D array, got {psi.shape}")
    if not np.all(np.isfinite(psi)):
        raise ValueError("State amplitudes must be finite")
    if normalized:
        require_normalized(psi)
    return _freeze(psi)


def as_operator(entries: ArrayLike, hermitian: bool = False) -> ComplexMatrix:
    """Build a square operator, optionally requiring it to be Hermitian."""
    matrix = np.asarray(entries, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.size < 1:
        raise DimensionError(f"Operator must be square, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("Operator entries must be finite")
    if hermitian:
        require_hermitian(matrix)
    return _freeze(matrix)


def identity(dim: int) -> ComplexMatrix:
    """Return the identity operator on a ``dim``-dimensional space."""
    if dim < 1:
        raise DimensionError(f"Dimension must be positive, got {dim}")
    return _freeze(np.eye(dim))


def dagger(matrix: ComplexMatrix) -> ComplexMatrix:
    """Return the conjugate transpose."""
    return _freeze(np.conj(np.asarray(matrix)).T)


def norm(psi: StateVector) -> float:
    """Return the Euclidean norm of a state vector."""
    return float(np.linalg.norm(psi))


def is_normalized(psi: StateVector, tol: float = Config.NORMALIZATION_TOL) -> bool:
    """Check that sum |amplitude|^2 equals 1 within ``tol``."""
    return abs(float(np.vdot(psi, psi).real) - 1.0) <= tol


def is_hermitian(matrix: ComplexMatrix, tol: float = Config.HERMITIAN_TOL) -> bool:
    """Check M = M^dagger entrywise within ``tol``."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    return bool(np.max(np.abs(matrix - np.conj(matrix).T), initial=0.0) <= tol)


def is_unitary(matrix: ComplexMatrix, tol: float = Config.UNITARY_TOL) -> bool:
    """Check U^dagger U = I entrywise within ``tol``."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    gram = np.conj(matrix).T @ matrix
    return bool(np.max(np.abs(gram - np.eye(matrix.shape[0]))) <= tol)


def require_normalized(psi: StateVector) -> None:
    """Raise NormalizationError unless ``psi`` is a unit vector."""
    if not is_normalized(psi):
        raise NormalizationError(
            f"State must be normalized, got squared norm {np.vdot(psi, psi).real:.12g}"
        )


def require_hermitian(matrix: ComplexMatrix) -> None:
    """Raise HermiticityError unless ``matrix`` is Hermitian."""
    if not is_hermitian(matrix):
        raise HermiticityError("Operator must be Hermitian")


def require_same_dim(*operands: np.ndarray) -> int:
    """Return the common dimension of states/operators or raise DimensionError."""
    dims = {np.asarray(op).shape[0] for op in operands}
    if len(dims) != 1:
        raise DimensionError(f"Dimension mismatch: {sorted(dims)}")
    return dims.pop()


def eigenvalues(matrix: ComplexMatrix) -> np.ndarray:
    """Return eigenvalues, real and ascending for Hermitian input."""
    if is_hermitian(matrix):
        return np.linalg.eigvalsh(matrix)
    return np.linalg.eigvals(matrix)


def pauli(axis: str) -> ComplexMatrix:
    """Return the 2x2 Pauli matrix for axis ``x``, ``y`` or ``z``."""
    key = axis.lower()
    if key not in _PAULI_ENTRIES:
        raise ValueError(f"Unsupported Pauli axis: {axis}")
    return _freeze(np.array(_PAULI_ENTRIES[key], dtype=np.complex128))


SIGMA_X = pauli("x")
SIGMA_Y = pauli("y")
SIGMA_Z = pauli("z")
IDENTITY_2 = identity(2)


def sigma_phi(phi: float) -> ComplexMatrix:
    """Return cos(phi) sigma_x + sin(phi) sigma_y, the equatorial spin component."""
    if not math.isfinite(phi):
        raise ValueError(f"Angle must be finite, got {phi}")
    return _freeze(math.cos(phi) * SIGMA_X + math.sin(phi) * SIGMA_Y)


def sigma_n(direction: ArrayLike) -> ComplexMatrix:
    """Return the spin component along a real 3-vector, normalized first."""
    n = np.asarray(direction, dtype=float)
    if n.shape != (3,):
        raise DimensionError(f"Bloch direction must have 3 components, got {n.shape}")
    length = float(np.linalg.norm(n))
    if length == 0.0 or not math.isfinite(length):
        raise ValueError("Bloch direction must be a nonzero finite vector")
    n = n / length
    return _freeze(n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z)


def spin_rotation(axis: str, angle: float) -> ComplexMatrix:
    """Return exp(-i angle sigma_axis / 2), a spin-1/2 rotation."""
    half = 0.5 * angle
    return _freeze(math.cos(half) * IDENTITY_2 - 1j * math.sin(half) * pauli(axis))


def bloch_state(theta: float, phi: float) -> StateVector:
    """Return cos(theta/2)|+z> + exp(i phi) sin(theta/2)|-z>."""
    return _freeze(
        np.array(
            [math.cos(theta / 2.0), np.exp(1j * phi) * math.sin(theta / 2.0)],
            dtype=np.complex128,
        )
    )


KET_PLUS_Z = bloch_state(0.0, 0.0)
KET_MINUS_Z = bloch_state(math.pi, 0.0)
KET_PLUS_X = bloch_state(math.pi / 2.0, 0.0)
KET_PLUS_Y = bloch_state(math.pi / 2.0, math.pi / 2.0)


def matrix_element(
    bra: StateVector, matrix: ComplexMatrix, ket: StateVector
) -> complex:
    """Return <bra|M|ket> with no normalization requirement."""
    require_same_dim(bra, matrix, ket)
    return complex(np.vdot(bra, np.asarray(matrix) @ np.asarray(ket)))


def expectation(psi: StateVector, matrix: ComplexMatrix) -> ComplexScalar:
    """Return <psi|M|psi> for a normalized state."""
    require_same_dim(psi, matrix)
    require_normalized(psi)
    return matrix_element(psi, matrix, psi)


def std_dev(psi: StateVector, matrix: ComplexMatrix) -> float:
    """Return sqrt(<M^2> - <M>^2) for a normalized state and Hermitian M."""
    require_hermitian(matrix)
    mean = expectation(psi, matrix).real
    second = expectation(psi, np.asarray(matrix) @ np.asarray(matrix)).real
    variance = second - mean * mean
    if variance < Config.VARIANCE_FLOOR:
        raise NumericalCorruptionError(f"Negative variance {variance:.3e}")
    return math.sqrt(max(variance, 0.0))


def commutator(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Return AB - BA."""
    require_same_dim(a, b)
    a = np.asarray(a)
    b = np.asarray(b)
    return _freeze(a @ b - b @ a)


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two states or two operators; ``a`` is the slow index."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != b.ndim or a.ndim not in (1, 2):
        raise DimensionError("tensor() needs two states or two operators")
    return _freeze(np.kron(a, b))

"""Random states and operators for the inequality audits.

Every function takes an explicit ``numpy.random.Generator`` so audit shards
stay reproducible.
"""

import numpy as np

from ..core.quantum import ComplexMatrix, StateVector, as_operator, as_state


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_state(rng: np.random.Generator, dim: int = 2) -> StateVector:
    """Normalized state drawn uniformly from the unit sphere in C^dim."""
    psi = _complex_gaussian(rng, dim)
    return as_state(psi / np.linalg.norm(psi), normalized=True)


def random_unit_vector(rng: np.random.Generator) -> np.ndarray:
    """Uniform direction on the Bloch sphere."""
    n = rng.standard_normal(3)
    while np.linalg.norm(n) < 1e-12:
        n = rng.standard_normal(3)
    return n / np.linalg.norm(n)


def random_hermitian(rng: np.random.Generator, dim: int = 2) -> ComplexMatrix:
    """(G + G^dagger)/2 for complex Gaussian G, scaled to unit spectral radius."""
    g = _complex_gaussian(rng, (dim, dim))
    h = (g + np.conj(g).T) / 2.0
    radius = float(np.max(np.abs(np.linalg.eigvalsh(h))))
    return as_operator(h / radius, hermitian=True)


def random_unitary(rng: np.random.Generator, dim: int = 2) -> ComplexMatrix:
    """Haar-random unitary from the QR decomposition with fixed phases."""
    q, r = np.linalg.qr(_complex_gaussian(rng, (dim, dim)))
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return as_operator(q * phases)


def random_involution(rng: np.random.Generator, dim: int = 2) -> ComplexMatrix:
    """Hermitian observable with spectrum {+1, -1}; both occur when dim > 1."""
    u = random_unitary(rng, dim)
    signs = np.ones(dim)
    signs[: max(dim // 2, 1)] = -1.0
    if dim > 1:
        signs = rng.permutation(signs)
    h = u @ np.diag(signs) @ np.conj(u).T
    return as_operator((h + np.conj(h).T) / 2.0, hermitian=True)

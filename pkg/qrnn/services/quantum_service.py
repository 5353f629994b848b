"""
Dense quantum primitives.

Register ordering: qubit 0 is the most significant tensor factor, so the
full register reads A (leading) then B (trailing).
"""
from functools import reduce
from typing import Union

import numpy as np

from qrnn.exceptions import (
    DimensionMismatchError,
    InvariantViolationError,
    NotUnitaryError,
)
from qrnn.models.density import DensityMatrix, HermitianObservable, invariant_checks_enabled
from qrnn.utils.validators import validate_axis

UNITARY_TOL = 1e-8
IMAG_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
PAULI = {
    'x': np.array([[0, 1], [1, 0]], dtype=complex),
    'y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'z': np.array([[1, 0], [0, -1]], dtype=complex),
}
for _matrix in (I2, *PAULI.values()):
    _matrix.setflags(write=False)


def _matrix_of(value) -> np.ndarray:
    if isinstance(value, (DensityMatrix, HermitianObservable)):
        return value.matrix
    return np.asarray(value, dtype=complex)


def as_observable(value: Union[HermitianObservable, np.ndarray]) -> HermitianObservable:
    """Coerce to HermitianObservable (validates Hermiticity)."""
    if isinstance(value, HermitianObservable):
        return value
    return HermitianObservable(value)


def kron(a, b) -> np.ndarray:
    """Kronecker product; dimensions multiply."""
    return np.kron(_matrix_of(a), _matrix_of(b))


def kron_all(matrices) -> np.ndarray:
    return reduce(np.kron, (_matrix_of(m) for m in matrices))


def unitarity_error(u: np.ndarray) -> float:
    """max |U^dagger U - I| elementwise."""
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def conjugate(matrix: np.ndarray, u: np.ndarray) -> np.ndarray:
    """U M U^dagger without checks."""
    return u @ matrix @ u.conj().T


def apply_unitary(rho: DensityMatrix, u) -> DensityMatrix:
    """Return U rho U^dagger."""
    u = _matrix_of(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] != rho.dim:
        raise DimensionMismatchError(f'Unitary {u.shape} does not act on a {rho.dim}-dim state')
    error = unitarity_error(u)
    if error > UNITARY_TOL:
        raise NotUnitaryError(f'U^dagger U deviates from I by {error:.3e}')
    return DensityMatrix(conjugate(rho.matrix, u), rho.n_qubits)


def partial_trace_matrix(matrix: np.ndarray, n_keep: int, n_drop: int) -> np.ndarray:
    """Trace out the trailing n_drop qubits; works on stacks shaped (..., d, d)."""
    keep, drop = 1 << n_keep, 1 << n_drop
    if matrix.shape[-2:] != (keep * drop, keep * drop):
        raise DimensionMismatchError(
            f'Matrix {matrix.shape[-2:]} is not on {n_keep} + {n_drop} qubits'
        )
    blocks = matrix.reshape(matrix.shape[:-2] + (keep, drop, keep, drop))
    return np.einsum('...ajbj->...ab', blocks)


def partial_trace_trailing(rho: DensityMatrix, n_keep: int, n_drop: int) -> DensityMatrix:
    """Reduce rho to its leading n_keep qubits."""
    if n_keep < 1 or n_drop < 0 or rho.n_qubits != n_keep + n_drop:
        raise DimensionMismatchError(
            f'State has {rho.n_qubits} qubits, cannot keep {n_keep} and drop {n_drop}'
        )
    return DensityMatrix(partial_trace_matrix(rho.matrix, n_keep, n_drop), n_keep)


def expectation(rho: DensityMatrix, obs) -> float:
    """Tr[rho O]; the imaginary residue is discarded."""
    obs = as_observable(obs)
    if obs.dim != rho.dim:
        raise DimensionMismatchError(f'Observable {obs.dim}x{obs.dim} on a {rho.dim}-dim state')

    value = np.einsum('ij,ji->', rho.matrix, obs.matrix)
    if invariant_checks_enabled() and abs(value.imag) > IMAG_TOL:
        raise InvariantViolationError(f'Expectation has imaginary part {value.imag:.3e}')
    return float(value.real)


def herm_eigendecompose(h) -> tuple:
    """
    Eigenvalues (ascending) and unitary eigenvector columns of a Hermitian matrix.
    """
    h = as_observable(h)
    eigenvalues, eigenvectors = np.linalg.eigh(h.matrix)
    return eigenvalues, eigenvectors


def unitary_from_hamiltonian(h, t: float) -> np.ndarray:
    """exp(-i h t) = V diag(exp(-i lambda_k t)) V^dagger."""
    h = as_observable(h)
    if not np.isfinite(t):
        raise ValueError(f'Evolution time must be finite, got {t}')
    if t == 0:
        return np.eye(h.dim, dtype=complex)

    eigenvalues, eigenvectors = herm_eigendecompose(h)
    phases = np.exp(-1j * eigenvalues * t)
    return (eigenvectors * phases) @ eigenvectors.conj().T


def rotation_gate(axis: str, angle: float) -> np.ndarray:
    """R_P(angle) = exp(-i angle P / 2)."""
    if not validate_axis(axis):
        raise ValueError(f'Unknown rotation axis {axis!r}')
    half = 0.5 * angle
    return np.cos(half) * I2 - 1j * np.sin(half) * PAULI[axis.lower()]


def embed_single_qubit(op: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """I^{(qubit)} (x) op (x) I^{(n - qubit - 1)}."""
    if not 0 <= qubit < n:
        raise IndexError(f'Qubit {qubit} out of range for {n} qubits')
    return np.kron(np.kron(np.eye(1 << qubit), op), np.eye(1 << (n - qubit - 1)))


def pauli_embed(axis: str, qubit: int, n: int) -> HermitianObservable:
    """Pauli P acting on one qubit of an n-qubit register."""
    if not validate_axis(axis):
        raise ValueError(f'Unknown Pauli axis {axis!r}')
    return HermitianObservable(embed_single_qubit(PAULI[axis.lower()], qubit, n))


def z_diagonal(qubit: int, n: int) -> np.ndarray:
    """Diagonal of Z_qubit as a real vector of length 2^n."""
    if not 0 <= qubit < n:
        raise IndexError(f'Qubit {qubit} out of range for {n} qubits')
    bits = (np.arange(1 << n) >> (n - qubit - 1)) & 1
    return 1.0 - 2.0 * bits

"""Density matrix and observable types."""
from dataclasses import dataclass

import numpy as np

from qrnn.exceptions import (
    DimensionMismatchError,
    InvariantViolationError,
    NotHermitianError,
)

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
OBSERVABLE_TOL = 1e-12

# Process-wide switch, set from Config.CHECK_INVARIANTS
_invariant_checks = {
    'enabled': True
}


def set_invariant_checks(enabled: bool) -> None:
    """Enable or disable validation at every DensityMatrix construction."""
    _invariant_checks['enabled'] = bool(enabled)


def invariant_checks_enabled() -> bool:
    return _invariant_checks['enabled']


def qubit_count(dim: int) -> int:
    """Number of qubits for a 2^n dimension."""
    n = int(dim).bit_length() - 1
    if dim < 1 or (1 << n) != dim:
        raise DimensionMismatchError(f'Dimension {dim} is not a power of two')
    return n


def check_density_matrix(matrix: np.ndarray, label: str = 'density matrix') -> None:
    """
    Raise InvariantViolationError unless matrix is a valid density matrix.

    Hermitian within 1e-10 elementwise, unit trace within 1e-10 and
    minimum eigenvalue at least -1e-9.
    """
    if not np.all(np.isfinite(matrix)):
        raise InvariantViolationError(f'{label} has non-finite entries')

    hermitian_error = np.max(np.abs(matrix - matrix.conj().T))
    if hermitian_error > HERMITIAN_TOL:
        raise InvariantViolationError(
            f'{label} not Hermitian (max deviation {hermitian_error:.3e})'
        )

    trace = np.trace(matrix)
    if abs(trace - 1.0) > TRACE_TOL:
        raise InvariantViolationError(f'{label} trace is {trace.real:.15f}')

    min_eigenvalue = np.linalg.eigvalsh(0.5 * (matrix + matrix.conj().T))[0]
    if min_eigenvalue < -PSD_TOL:
        raise InvariantViolationError(
            f'{label} not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})'
        )


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Trace-one positive Hermitian matrix on n qubits."""

    matrix: np.ndarray
    n_qubits: int

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        dim = 1 << self.n_qubits
        if matrix.shape != (dim, dim):
            raise DimensionMismatchError(
                f'Expected {dim}x{dim} matrix for {self.n_qubits} qubits, got {matrix.shape}'
            )
        matrix.setflags(write=False)
        object.__setattr__(self, 'matrix', matrix)

        if _invariant_checks['enabled']:
            check_density_matrix(matrix)

    def __repr__(self):
        return f'<DensityMatrix {self.n_qubits} qubits>'

    @classmethod
    def zero_state(cls, n_qubits: int) -> 'DensityMatrix':
        """|0...0><0...0| on n qubits."""
        dim = 1 << n_qubits
        matrix = np.zeros((dim, dim), dtype=complex)
        matrix[0, 0] = 1.0
        return cls(matrix, n_qubits)

    @classmethod
    def from_pure(cls, vector) -> 'DensityMatrix':
        vector = np.asarray(vector, dtype=complex).ravel()
        vector = vector / np.linalg.norm(vector)
        return cls(np.outer(vector, vector.conj()), qubit_count(vector.size))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def is_valid(self) -> bool:
        try:
            check_density_matrix(self.matrix)
        except InvariantViolationError:
            return False
        return True


@dataclass(frozen=True, eq=False)
class HermitianObservable:
    """Hermitian operator, Hermitian within 1e-12."""

    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 1:
            raise DimensionMismatchError(f'Observable must be square, got {matrix.shape}')
        if not np.all(np.isfinite(matrix)):
            raise NotHermitianError('Observable has non-finite entries')

        deviation = np.max(np.abs(matrix - matrix.conj().T))
        if deviation > OBSERVABLE_TOL:
            raise NotHermitianError(f'Matrix not Hermitian (max deviation {deviation:.3e})')

        matrix.setflags(write=False)
        object.__setattr__(self, 'matrix', matrix)

    def __repr__(self):
        return f'<HermitianObservable {self.dim}x{self.dim}>'

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_qubits(self) -> int:
        return qubit_count(self.dim)

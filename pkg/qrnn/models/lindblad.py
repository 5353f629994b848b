"""Open-system model for the spin-chain target series."""
from dataclasses import dataclass

import numpy as np

from qrnn.exceptions import DimensionMismatchError
from qrnn.models.density import HermitianObservable


@dataclass(frozen=True, eq=False)
class LindbladSystem:
    """Hamiltonian and collapse operators C_k on n qubits."""

    hamiltonian: HermitianObservable
    collapse_ops: tuple
    n_qubits: int

    def __post_init__(self):
        dim = 1 << self.n_qubits
        if self.hamiltonian.dim != dim:
            raise DimensionMismatchError(
                f'Hamiltonian is {self.hamiltonian.dim}x{self.hamiltonian.dim}, expected {dim}x{dim}'
            )
        ops = tuple(np.array(op, dtype=complex) for op in self.collapse_ops)
        for op in ops:
            if op.shape != (dim, dim):
                raise DimensionMismatchError(f'Collapse operator has shape {op.shape}, expected {dim}x{dim}')
            op.setflags(write=False)
        object.__setattr__(self, 'collapse_ops', ops)

    def __repr__(self):
        return f'<LindbladSystem {self.n_qubits} qubits, {len(self.collapse_ops)} collapse ops>'

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

"""Gradient and sensitivity types."""
from dataclasses import dataclass

import numpy as np

from qrnn.exceptions import InvariantViolationError
from qrnn.models.density import HERMITIAN_TOL, TRACE_TOL


@dataclass(frozen=True, eq=False)
class GradientVector:
    """dL/dtheta_i in the QrnnParameters layout."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float).ravel()
        if not np.all(np.isfinite(entries)):
            raise InvariantViolationError('Gradient has non-finite entries')
        entries.setflags(write=False)
        object.__setattr__(self, 'entries', entries)

    def __repr__(self):
        return f'<GradientVector {len(self)} entries |g|={self.norm():.3e}>'

    def __len__(self):
        return self.entries.size

    def __getitem__(self, index):
        return self.entries[index]

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))


@dataclass(frozen=True, eq=False)
class SensitivityState:
    """rho_A together with sigma_i = d rho_A / d theta_i for every angle."""

    rho_A: np.ndarray
    sigma: np.ndarray

    def check(self) -> None:
        """Every sigma_i must be Hermitian and trace-zero within 1e-10."""
        hermitian_error = np.max(np.abs(self.sigma - self.sigma.conj().transpose(0, 2, 1)), initial=0.0)
        if hermitian_error > HERMITIAN_TOL:
            raise InvariantViolationError(f'Sensitivity not Hermitian (deviation {hermitian_error:.3e})')

        traces = np.trace(self.sigma, axis1=1, axis2=2)
        trace_error = np.max(np.abs(traces), initial=0.0)
        if trace_error > TRACE_TOL:
            raise InvariantViolationError(f'Sensitivity trace {trace_error:.3e} is not zero')

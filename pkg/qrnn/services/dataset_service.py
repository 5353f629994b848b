"""Target time series: cosine wave, triangle wave and a dissipative 3-spin chain."""
import logging
import math

import numpy as np

from qrnn.exceptions import DimensionMismatchError, IntegrationError, InvariantViolationError
from qrnn.models import DensityMatrix, HermitianObservable, LindbladSystem, TimeSeries
from qrnn.services.quantum_service import PAULI, embed_single_qubit, expectation, kron_all, pauli_embed
from qrnn.utils.validators import validate_product_label

logger = logging.getLogger(__name__)

# t' = 8t/199 for the waveforms, t' = 100t/499 for the spin chain
WAVE_TIME_SCALE = 8.0 / 199.0
SPIN_TIME_SCALE = 100.0 / 499.0

SPIN_FIELD = 2.0 * math.pi
SPIN_COUPLING = 0.1 * math.pi
SPIN_COLLAPSE_STRENGTH = math.sqrt(0.002)

TRACE_DRIFT_TOL = 1e-8
HERMITIAN_DRIFT_TOL = 1e-9

_SQRT_HALF = math.sqrt(0.5)
PRODUCT_STATE_VECTORS = {
    '0': np.array([1, 0], dtype=complex),
    '1': np.array([0, 1], dtype=complex),
    '+': np.array([_SQRT_HALF, _SQRT_HALF], dtype=complex),
    '-': np.array([_SQRT_HALF, -_SQRT_HALF], dtype=complex),
    'r': np.array([_SQRT_HALF, 1j * _SQRT_HALF], dtype=complex),
    'l': np.array([_SQRT_HALF, -1j * _SQRT_HALF], dtype=complex),
}

TASKS = ('cosine', 'triangle', 'spin')


def gen_cosine(total_len: int = 200, train_len: int = 100) -> TimeSeries:
    """x_t = cos(pi t') / 2."""
    t_prime = WAVE_TIME_SCALE * np.arange(total_len)
    return TimeSeries(0.5 * np.cos(np.pi * t_prime), train_len, name='cosine')


def triangle_wave(t_prime: float) -> float:
    """
    Piecewise-linear wave of period 2.

    1/2 - t' on [0, 1], t' - 3/2 on [1, 2], repeated.
    """
    u = math.fmod(t_prime, 2.0)
    if u < 0:
        u += 2.0
    return 0.5 - u if u <= 1.0 else u - 1.5


def gen_triangle(total_len: int = 200, train_len: int = 100) -> TimeSeries:
    values = [triangle_wave(WAVE_TIME_SCALE * t) for t in range(total_len)]
    return TimeSeries(values, train_len, name='triangle')


def product_state(label: str) -> DensityMatrix:
    """Product state from a label over {0, 1, +, -, r, l}; r and l are the +-Y eigenstates."""
    if not validate_product_label(label):
        raise ValueError(f'Invalid product-state label {label!r}')
    vector = kron_all([PRODUCT_STATE_VECTORS[c].reshape(2, 1) for c in label]).ravel()
    return DensityMatrix.from_pure(vector)


def build_spin_system(n_qubits: int = 3, field: float = SPIN_FIELD, coupling=SPIN_COUPLING,
                      collapse_strength: float = SPIN_COLLAPSE_STRENGTH) -> LindbladSystem:
    """
    Open spin chain.

    H = -1/2 sum_i h Z_i - 1/2 sum_i (Jx X_i X_{i+1} + Jy Y_i Y_{i+1} + Jz Z_i Z_{i+1}),
    C_k = c (X_k + Y_k). `coupling` is one value for all three axes or an
    (Jx, Jy, Jz) triple.
    """
    if n_qubits < 1:
        raise ValueError('Spin chain needs at least one spin')
    couplings = (coupling,) * 3 if np.isscalar(coupling) else tuple(coupling)
    if len(couplings) != 3:
        raise ValueError(f'Expected 3 coupling constants, got {len(couplings)}')

    dim = 1 << n_qubits
    hamiltonian = np.zeros((dim, dim), dtype=complex)
    for i in range(n_qubits):
        hamiltonian -= 0.5 * field * embed_single_qubit(PAULI['z'], i, n_qubits)
    for i in range(n_qubits - 1):
        for J, axis in zip(couplings, 'xyz'):
            hamiltonian -= 0.5 * J * (
                embed_single_qubit(PAULI[axis], i, n_qubits) @ embed_single_qubit(PAULI[axis], i + 1, n_qubits)
            )

    collapse_ops = [
        collapse_strength * embed_single_qubit(PAULI['x'] + PAULI['y'], k, n_qubits)
        for k in range(n_qubits)
    ]
    return LindbladSystem(HermitianObservable(hamiltonian), tuple(collapse_ops), n_qubits)


def lindblad_rhs(sigma, system: LindbladSystem) -> np.ndarray:
    """-i[H, sigma] + sum_k (C sigma C^dagger - 1/2 {C^dagger C, sigma})."""
    matrix = np.asarray(getattr(sigma, 'matrix', sigma), dtype=complex)
    if matrix.shape != (system.dim, system.dim):
        raise DimensionMismatchError(f'State {matrix.shape} does not match a {system.dim}-dim system')

    h = system.hamiltonian.matrix
    derivative = -1j * (h @ matrix - matrix @ h)
    for c in system.collapse_ops:
        c_dagger = c.conj().T
        c_squared = c_dagger @ c
        derivative += c @ matrix @ c_dagger - 0.5 * (c_squared @ matrix + matrix @ c_squared)
    return derivative


def rk4_propagate(system: LindbladSystem, matrix: np.ndarray, duration: float, substeps: int) -> np.ndarray:
    """Classical RK4 over `substeps` uniform steps; no renormalization."""
    if substeps < 1:
        raise ValueError(f'substeps must be at least 1, got {substeps}')
    dt = duration / substeps
    sigma = np.array(matrix, dtype=complex)
    for _ in range(substeps):
        k1 = lindblad_rhs(sigma, system)
        k2 = lindblad_rhs(sigma + 0.5 * dt * k1, system)
        k3 = lindblad_rhs(sigma + 0.5 * dt * k2, system)
        k4 = lindblad_rhs(sigma + dt * k3, system)
        sigma = sigma + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return sigma


def integrate_lindblad_rk4(system: LindbladSystem, sigma0: DensityMatrix, sample_times, substeps: int = 20) -> list:
    """
    States at every sample time.

    Each interval is integrated from the previous re-symmetrized,
    trace-renormalized sample. Drift beyond 1e-8 in trace or 1e-9 in
    Hermiticity raises IntegrationError.
    """
    sample_times = [float(t) for t in sample_times]
    if not sample_times or sample_times[0] != 0.0:
        raise ValueError('sample_times must start at 0')
    if any(b <= a for a, b in zip(sample_times, sample_times[1:])):
        raise ValueError('sample_times must be strictly increasing')
    if substeps < 1:
        raise ValueError(f'substeps must be at least 1, got {substeps}')
    if sigma0.n_qubits != system.n_qubits:
        raise DimensionMismatchError(f'Initial state on {sigma0.n_qubits} qubits, system on {system.n_qubits}')

    states = [sigma0]
    current = sigma0.matrix
    for index, (start, end) in enumerate(zip(sample_times, sample_times[1:]), start=1):
        raw = rk4_propagate(system, current, end - start, substeps)

        trace_drift = abs(np.trace(raw) - 1.0)
        hermitian_drift = np.max(np.abs(raw - raw.conj().T))
        if trace_drift > TRACE_DRIFT_TOL or hermitian_drift > HERMITIAN_DRIFT_TOL:
            raise IntegrationError(
                f'Drift at sample {index} (trace {trace_drift:.3e}, Hermiticity {hermitian_drift:.3e}); '
                f'increase substeps above {substeps}'
            )

        current = 0.5 * (raw + raw.conj().T)
        current = current / np.trace(current).real
        try:
            states.append(DensityMatrix(current, system.n_qubits))
        except InvariantViolationError as e:
            raise IntegrationError(f'Sample {index} is not a density matrix ({e}); increase substeps above {substeps}')

    return states


def gen_spin_series(total_len: int = 500, train_len: int = 200, substeps: int = 20,
                    initial_state: str = '000') -> TimeSeries:
    """<X_1(t')> of the open 3-spin chain sampled at t' = 100t/499."""
    system = build_spin_system(len(initial_state))
    sigma0 = product_state(initial_state)
    sample_times = SPIN_TIME_SCALE * np.arange(total_len)

    logger.debug(f'Integrating spin chain from |{initial_state}> over {total_len} samples')
    states = integrate_lindblad_rk4(system, sigma0, sample_times, substeps)

    x_first = pauli_embed('x', 0, system.n_qubits)
    values = np.clip([expectation(state, x_first) for state in states], -1.0, 1.0)
    return TimeSeries(values, train_len, name='spin')


def generate_series(task: str, total_len: int, train_len: int, substeps: int = 20,
                    spin_initial_state: str = '000') -> TimeSeries:
    """Series for a task name."""
    if task == 'cosine':
        return gen_cosine(total_len, train_len)
    if task == 'triangle':
        return gen_triangle(total_len, train_len)
    if task == 'spin':
        return gen_spin_series(total_len, train_len, substeps, spin_initial_state)
    raise ValueError(f'Unknown task {task!r}; choose from {TASKS}')

"""QRNN circuit construction and the encode -> evolve -> measure -> reset loop."""
import logging
from functools import lru_cache

import numpy as np

from qrnn.exceptions import DimensionMismatchError, DomainError, NotUnitaryError
from qrnn.models import DensityMatrix, HermitianObservable, QrnnArchitecture, QrnnParameters, QrnnState
from qrnn.models.density import check_density_matrix, invariant_checks_enabled
from qrnn.services.quantum_service import (
    PAULI,
    conjugate,
    embed_single_qubit,
    kron_all,
    partial_trace_matrix,
    rotation_gate,
    unitarity_error,
    unitary_from_hamiltonian,
    z_diagonal,
)
from qrnn.utils.validators import validate_unit_interval

logger = logging.getLogger(__name__)

EVOLUTION_UNITARY_TOL = 1e-9


def _require_unit_interval(x) -> float:
    if not validate_unit_interval(x):
        raise DomainError(f'Input {x!r} outside [-1, 1]; arccos encoding undefined')
    return float(x)


def build_input_unitary(x: float, n_B: int) -> np.ndarray:
    """R_y(arccos x) on every qubit of group B."""
    x = _require_unit_interval(x)
    gate = rotation_gate('y', np.arccos(x))
    return kron_all([gate] * n_B)


def input_vector(x: float, n_B: int) -> np.ndarray:
    """U_in(x)|0...0>."""
    return build_input_unitary(x, n_B)[:, 0]


def input_density(x: float, n_B: int) -> np.ndarray:
    """rho_in^B = U_in |0><0| U_in^dagger."""
    vector = input_vector(x, n_B)
    return np.outer(vector, vector.conj())


def build_interaction_hamiltonian(arch: QrnnArchitecture) -> HermitianObservable:
    """H_int = sum_j a_j X_j + sum_{j>k} J_jk Z_j Z_k."""
    n = arch.n
    h = np.zeros((1 << n, 1 << n), dtype=complex)
    for j, a_j in enumerate(arch.a):
        if a_j:
            h += a_j * embed_single_qubit(PAULI['x'], j, n)

    diagonal = np.zeros(1 << n)
    for (j, k), J_jk in arch.couplings().items():
        diagonal += J_jk * z_diagonal(j, n) * z_diagonal(k, n)
    h += np.diag(diagonal)

    return HermitianObservable(h)


@lru_cache(maxsize=64)
def interaction_propagator(arch: QrnnArchitecture) -> np.ndarray:
    """exp(-i H_int tau), shared by every layer."""
    propagator = unitary_from_hamiltonian(build_interaction_hamiltonian(arch), arch.tau)
    propagator.setflags(write=False)
    return propagator


def single_qubit_rotation(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """U_1 = R_x(alpha) R_z(beta) R_x(gamma); R_x(gamma) acts first."""
    return rotation_gate('x', alpha) @ rotation_gate('z', beta) @ rotation_gate('x', gamma)


def layer_rotation(params: QrnnParameters, layer: int) -> np.ndarray:
    """Tensor product of U_1 over all qubits for a 0-based layer."""
    return kron_all([single_qubit_rotation(*angles) for angles in params.angles[layer]])


def check_parameters(arch: QrnnArchitecture, params: QrnnParameters) -> None:
    if len(params) != arch.n_params or params.depth != arch.depth or params.n_qubits != arch.n:
        raise DimensionMismatchError(
            f'Parameters ({len(params)} entries, D={params.depth}, n={params.n_qubits}) '
            f'do not match {arch!r}'
        )


def build_evolution_unitary(arch: QrnnArchitecture, params: QrnnParameters) -> np.ndarray:
    """
    U(theta) = prod_{d=D..1} exp(-i H_int tau) R_d.

    Layer 1 acts first in time.
    """
    check_parameters(arch, params)
    propagator = interaction_propagator(arch)

    unitary = np.eye(1 << arch.n, dtype=complex)
    for layer in range(arch.depth):
        unitary = propagator @ layer_rotation(params, layer) @ unitary

    if invariant_checks_enabled():
        error = unitarity_error(unitary)
        if error > EVOLUTION_UNITARY_TOL:
            raise NotUnitaryError(f'Evolution unitary deviates from unitarity by {error:.3e}')
    return unitary


def readout_diagonals(arch: QrnnArchitecture) -> np.ndarray:
    """Z diagonals of the group-B qubits, shape (n_B, 2^n)."""
    return np.array([z_diagonal(q, arch.n) for q in range(arch.n_A, arch.n)])


def readout_expectations(matrix: np.ndarray, arch: QrnnArchitecture) -> np.ndarray:
    """<Z_q> for each group-B qubit of a full-register matrix."""
    return readout_diagonals(arch) @ np.real(np.diagonal(matrix))


def initial_state(arch: QrnnArchitecture, params: QrnnParameters) -> QrnnState:
    """rho_A = |0><0|^{n_A} with the evolution unitary built from params."""
    return QrnnState(DensityMatrix.zero_state(arch.n_A), build_evolution_unitary(arch, params), params, arch)


def qrnn_step(state: QrnnState, x: float, arch: QrnnArchitecture, params: QrnnParameters) -> tuple:
    """
    One time step.

    Returns (new state, <Z_q> on each B qubit, y_bar = c_out * mean <Z_q>).
    """
    x = _require_unit_interval(x)
    if not state.is_built_from(arch, params):
        state = QrnnState(state.rho_A, build_evolution_unitary(arch, params), params, arch)

    rho_in = DensityMatrix(np.kron(state.rho_A.matrix, input_density(x, arch.n_B)), arch.n)
    rho_out = DensityMatrix(conjugate(rho_in.matrix, state.unitary), arch.n)

    z_expectations = readout_expectations(rho_out.matrix, arch)
    y_bar = params.c_out * float(np.mean(z_expectations))

    rho_A = DensityMatrix(partial_trace_matrix(rho_out.matrix, arch.n_A, arch.n_B), arch.n_A)
    return QrnnState(rho_A, state.unitary, state.params, state.arch), [float(z) for z in z_expectations], y_bar


def run_sequence(arch: QrnnArchitecture, params: QrnnParameters, inputs) -> dict:
    """
    Teacher-forced run keeping per-step detail.

    Returns dict with 'outputs' (y_bar), 'mean_z' and 'states' (rho_A before
    each step, then the final one).
    """
    inputs = [_require_unit_interval(x) for x in inputs]
    state = initial_state(arch, params)

    outputs, mean_z, states = [], [], [state.rho_A]
    for x in inputs:
        state, z_expectations, y_bar = qrnn_step(state, x, arch, params)
        outputs.append(y_bar)
        mean_z.append(float(np.mean(z_expectations)))
        states.append(state.rho_A)

    return {
        'outputs': outputs,
        'mean_z': mean_z,
        'states': states
    }


def run_teacher_forced(arch: QrnnArchitecture, params: QrnnParameters, inputs) -> list:
    """Feed the true x_t at every step; returns y_bar_0..y_bar_{len-1}."""
    return run_sequence(arch, params, inputs)['outputs']


def run_closed_loop(arch: QrnnArchitecture, params: QrnnParameters, seed_inputs, horizon: int) -> list:
    """
    Teacher-forced over seed_inputs, then feed clamp(y_bar) back for `horizon` steps.

    Returns horizon + 1 values: y_bar_{T-1} (prediction of x_T) followed by the
    closed-loop predictions of x_{T+1}..x_{T+horizon}.
    """
    if horizon < 0:
        raise ValueError(f'horizon must be non-negative, got {horizon}')
    seed_inputs = [_require_unit_interval(x) for x in seed_inputs]
    if not seed_inputs:
        raise ValueError('Closed-loop prediction needs at least one seed input')

    state = initial_state(arch, params)
    for x in seed_inputs:
        state, _, y_bar = qrnn_step(state, x, arch, params)

    predictions = [y_bar]
    for _ in range(horizon):
        x = min(1.0, max(-1.0, y_bar))
        state, _, y_bar = qrnn_step(state, x, arch, params)
        predictions.append(y_bar)

    return predictions


def verify_trajectory(arch: QrnnArchitecture, params: QrnnParameters, inputs) -> int:
    """
    Check every density matrix of a teacher-forced run, whatever the global
    invariant switch says. Returns the number of steps checked.
    """
    unitary = build_evolution_unitary(arch, params)
    rho_A = DensityMatrix.zero_state(arch.n_A).matrix

    for t, x in enumerate(inputs):
        rho_in = np.kron(rho_A, input_density(x, arch.n_B))
        check_density_matrix(rho_in, f'rho_in at step {t}')
        rho_out = conjugate(rho_in, unitary)
        check_density_matrix(rho_out, f'rho_out at step {t}')
        rho_A = partial_trace_matrix(rho_out, arch.n_A, arch.n_B)
        check_density_matrix(rho_A, f'rho_A at step {t}')

    logger.debug(f'Verified density-matrix invariants over {len(inputs)} steps')
    return len(inputs)

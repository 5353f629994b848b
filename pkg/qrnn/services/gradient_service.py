"""
Gradients of the training cost L = 1/2 sum_t (y_bar_t - x_{t+1})^2.

Three evaluators share one parameter layout:
  - forward sensitivity: propagates sigma_i = d rho_A / d theta_i next to rho_A
  - parameter shift: re-runs the sequence with one occurrence of an angle
    shifted by +-pi/2
  - central finite differences, used as an oracle
"""
import logging
import math
from typing import Callable, Optional

import numpy as np

from qrnn.exceptions import DimensionMismatchError
from qrnn.models import DensityMatrix, GradientVector, QrnnArchitecture, QrnnParameters, QrnnState, SensitivityState
from qrnn.models.density import check_density_matrix, invariant_checks_enabled
from qrnn.services.qrnn_service import (
    build_evolution_unitary,
    check_parameters,
    input_vector,
    interaction_propagator,
    layer_rotation,
    qrnn_step,
    readout_diagonals,
    run_sequence,
)
from qrnn.services.quantum_service import PAULI, embed_single_qubit, partial_trace_matrix, rotation_gate

logger = logging.getLogger(__name__)

SHIFT = 0.5 * np.pi


def _check_sequence(arch: QrnnArchitecture, params: QrnnParameters, inputs, targets) -> tuple:
    check_parameters(arch, params)
    inputs = [float(x) for x in inputs]
    targets = [float(y) for y in targets]
    if len(targets) != len(inputs) - 1:
        raise DimensionMismatchError(
            f'Expected {len(inputs) - 1} targets for {len(inputs)} inputs, got {len(targets)}'
        )
    return inputs, targets


def generator_matrices(arch: QrnnArchitecture, params: QrnnParameters) -> tuple:
    """
    Effective generators K_i with dU/dtheta_i = (-i/2) K_i U.

    For an angle in layer d, K_i = G P G^dagger where G is everything applied
    after the gate inside U (later layers, this layer's propagator and the
    rest of the single-qubit decomposition). Returns (K stacked in parameter
    layout, U).
    """
    check_parameters(arch, params)
    n = arch.n
    propagator = interaction_propagator(arch)
    layers = [propagator @ layer_rotation(params, d) for d in range(arch.depth)]

    suffixes = [None] * arch.depth
    suffix = np.eye(1 << n, dtype=complex)
    for d in reversed(range(arch.depth)):
        suffixes[d] = suffix @ propagator
        suffix = suffix @ layers[d]
    unitary = suffix

    pauli_x = [embed_single_qubit(PAULI['x'], q, n) for q in range(n)]
    pauli_z = [embed_single_qubit(PAULI['z'], q, n) for q in range(n)]

    generators = np.empty((arch.n_angles, 1 << n, 1 << n), dtype=complex)
    for d in range(arch.depth):
        for q in range(n):
            alpha, beta, _ = params.angles[d, q]
            outer_alpha = embed_single_qubit(rotation_gate('x', alpha), q, n)
            outer_beta = embed_single_qubit(rotation_gate('x', alpha) @ rotation_gate('z', beta), q, n)

            frames = (
                (suffixes[d], pauli_x[q]),
                (suffixes[d] @ outer_alpha, pauli_z[q]),
                (suffixes[d] @ outer_beta, pauli_x[q]),
            )
            for which, (frame, pauli) in enumerate(frames):
                generators[params.angle_index(d, q, which)] = frame @ pauli @ frame.conj().T

    return generators, unitary


def _propagate_sensitivities(arch: QrnnArchitecture, params: QrnnParameters, inputs):
    """
    Yield per step (mean <Z> over B, d y_bar / d angles, SensitivityState before the step).

    rho_in^B is pure, so U (rho_A (x) |b><b|) U^dagger = W rho_A W^dagger with
    W = U[:, :, b] of shape (2^n, 2^{n_A}).
    """
    generators, unitary = generator_matrices(arch, params)
    n_angles = arch.n_angles
    dim_A, dim_B, dim = 1 << arch.n_A, 1 << arch.n_B, 1 << arch.n

    generated = (generators @ unitary).reshape(n_angles, dim, dim_A, dim_B)
    unitary_blocks = unitary.reshape(dim, dim_A, dim_B)
    signs = readout_diagonals(arch)

    rho_A = DensityMatrix.zero_state(arch.n_A).matrix
    sigma = np.zeros((n_angles, dim_A, dim_A), dtype=complex)
    checks = invariant_checks_enabled()

    for x in inputs:
        state = SensitivityState(rho_A, sigma)
        if checks:
            state.check()

        b = input_vector(x, arch.n_B)
        w = unitary_blocks @ b
        dw = generated @ b
        rho_w = rho_A @ w.conj().T

        rho_out = w @ rho_w
        product = dw @ rho_w
        propagated = w @ sigma @ w.conj().T

        diagonal = np.real(np.diagonal(rho_out))
        d_diagonal = np.imag(np.diagonal(product, axis1=1, axis2=2)) + np.real(
            np.diagonal(propagated, axis1=1, axis2=2)
        )

        mean_z = float(np.mean(signs @ diagonal))
        d_mean_z = np.mean(d_diagonal @ signs.T, axis=1)
        yield mean_z, d_mean_z, state

        reduced = partial_trace_matrix(product, arch.n_A, arch.n_B)
        sigma = -0.5j * (reduced - reduced.conj().transpose(0, 2, 1)) + partial_trace_matrix(
            propagated, arch.n_A, arch.n_B
        )
        rho_A = partial_trace_matrix(rho_out, arch.n_A, arch.n_B)
        if checks:
            check_density_matrix(rho_A, 'rho_A')


def sensitivity_trajectory(arch: QrnnArchitecture, params: QrnnParameters, inputs) -> list:
    """SensitivityState before each step of a teacher-forced run."""
    check_parameters(arch, params)
    return [state for _, _, state in _propagate_sensitivities(arch, params, inputs)]


def output_jacobian(arch: QrnnArchitecture, params: QrnnParameters, inputs) -> tuple:
    """
    Teacher-forced outputs and their exact derivatives.

    Returns (y_bar list, mean-Z list, array (len(inputs), n_params) of d y_bar_t / d theta).
    """
    check_parameters(arch, params)
    c_out = params.c_out
    outputs, mean_z, rows = [], [], []
    for m, d_m, _ in _propagate_sensitivities(arch, params, inputs):
        outputs.append(c_out * m)
        mean_z.append(m)
        rows.append(np.append(c_out * d_m, m))
    return outputs, mean_z, np.array(rows).reshape(len(rows), params.values.size)


def _assemble(residuals, jacobian: np.ndarray) -> np.ndarray:
    """sum_t r_t d y_bar_t / d theta_i with compensated summation."""
    return np.array([
        math.fsum(r * d for r, d in zip(residuals, jacobian[:, i]))
        for i in range(jacobian.shape[1])
    ])


def grad_forward_sensitivity(arch: QrnnArchitecture, params: QrnnParameters, inputs, targets) -> GradientVector:
    """Exact gradient by forward propagation of d rho_A / d theta."""
    inputs, targets = _check_sequence(arch, params, inputs, targets)
    outputs, _, jacobian = output_jacobian(arch, params, inputs[:len(targets)])
    residuals = [y - target for y, target in zip(outputs, targets)]
    return GradientVector(_assemble(residuals, jacobian))


def grad_parameter_shift(arch: QrnnArchitecture, params: QrnnParameters, inputs, targets,
                         indices: Optional[list] = None) -> tuple:
    """
    Unrolled parameter-shift gradient.

    For angle i and step s the sequence is resumed from the nominal rho_A
    before step s, with U(theta_i +- pi/2) used only at step s. Each of the
    two resumed runs counts as one sequence evaluation, so one angle costs
    2 * len(inputs). Entries outside `indices` (angles only) are left at 0;
    d L / d c_out is always analytic.

    Returns (GradientVector, evaluation_count).
    """
    inputs, targets = _check_sequence(arch, params, inputs, targets)
    if indices is None:
        indices = range(params.n_angles)
    indices = sorted(set(int(i) for i in indices))
    for i in indices:
        if not 0 <= i < params.n_angles:
            raise IndexError(f'Angle index {i} out of range for {params.n_angles} angles')

    nominal = run_sequence(arch, params, inputs)
    outputs, mean_z, states = nominal['outputs'], nominal['mean_z'], nominal['states']
    residuals = [y - target for y, target in zip(outputs, targets)]
    nominal_unitary = build_evolution_unitary(arch, params)

    entries = np.zeros(params.values.size)
    evaluation_count = 0
    for i in indices:
        derivatives = [[] for _ in inputs]
        for sign in (1.0, -1.0):
            shifted = params.shifted(i, sign * SHIFT)
            shifted_unitary = build_evolution_unitary(arch, shifted)
            for s in range(len(inputs)):
                state = QrnnState(states[s], shifted_unitary, shifted, arch)
                state, _, y_bar = qrnn_step(state, inputs[s], arch, shifted)
                run = [y_bar]
                state = QrnnState(state.rho_A, nominal_unitary, params, arch)
                for x in inputs[s + 1:]:
                    state, _, y_bar = qrnn_step(state, x, arch, params)
                    run.append(y_bar)
                evaluation_count += 1

                for offset, value in enumerate(run):
                    derivatives[s + offset].append(0.5 * sign * value)

        d_outputs = [math.fsum(terms) for terms in derivatives]
        entries[i] = math.fsum(r * d for r, d in zip(residuals, d_outputs))

    entries[-1] = math.fsum(r * m for r, m in zip(residuals, mean_z))
    logger.debug(f'Parameter shift: {evaluation_count} sequence evaluations for {len(indices)} angles')
    return GradientVector(entries), evaluation_count


def grad_finite_difference(arch: QrnnArchitecture, params: QrnnParameters, inputs, targets,
                           h: float = 1e-5, cost_fn: Optional[Callable] = None) -> GradientVector:
    """
    Central differences [L(theta + h e_i) - L(theta - h e_i)] / 2h.

    cost_fn, when given, replaces the QRNN cost and is called with the raw
    parameter vector.
    """
    if not h > 0:
        raise ValueError(f'Step h must be positive, got {h}')
    inputs, targets = _check_sequence(arch, params, inputs, targets)

    if cost_fn is None:
        # Local import to avoid a circular import with training_service
        from qrnn.services.training_service import sequence_cost

        def cost_fn(vector):
            return sequence_cost(arch, QrnnParameters.from_vector(arch, vector), inputs, targets)

    base = params.values
    entries = np.empty(base.size)
    for i in range(base.size):
        plus = base.copy()
        plus[i] += h
        minus = base.copy()
        minus[i] -= h
        entries[i] = (cost_fn(plus) - cost_fn(minus)) / (2.0 * h)

    return GradientVector(entries)

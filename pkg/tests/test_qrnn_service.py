"""Tests for the QRNN step, teacher-forced runs and closed-loop prediction."""
from functools import reduce

import numpy as np
import pytest
from scipy.linalg import expm

from qrnn.exceptions import DimensionMismatchError, DomainError
from qrnn.models import DensityMatrix, QrnnArchitecture, QrnnParameters
from qrnn.services.dataset_service import gen_cosine, gen_spin_series, gen_triangle
from qrnn.services.qrnn_service import (
    build_evolution_unitary,
    build_input_unitary,
    build_interaction_hamiltonian,
    initial_state,
    input_density,
    interaction_propagator,
    qrnn_step,
    run_closed_loop,
    run_sequence,
    run_teacher_forced,
    single_qubit_rotation,
    verify_trajectory,
)
from qrnn.services.quantum_service import PAULI
from tests.conftest import make_architecture

X = PAULI['x']
Z = PAULI['z']


def embed(op, qubit, n):
    factors = [np.eye(2)] * n
    factors[qubit] = op
    return reduce(np.kron, factors)


def brute_force_unitary(arch, params):
    """U built from scipy expm and explicit Kronecker products."""
    n = arch.n
    h = sum(arch.a[j] * embed(X, j, n) for j in range(n))
    for (j, k), J in arch.couplings().items():
        h = h + J * embed(Z, j, n) @ embed(Z, k, n)
    propagator = expm(-1j * arch.tau * h)

    u = np.eye(1 << n, dtype=complex)
    for d in range(arch.depth):
        gates = []
        for q in range(n):
            alpha, beta, gamma = params.angles[d, q]
            gates.append(
                expm(-0.5j * alpha * X) @ expm(-0.5j * beta * Z) @ expm(-0.5j * gamma * X)
            )
        u = propagator @ reduce(np.kron, gates) @ u
    return u


class TestInputEncoding:
    """R_y(arccos x) on every B qubit."""

    def test_x_one_keeps_zero_state(self):
        """x = 1 leaves |0><0|."""
        np.testing.assert_allclose(input_density(1.0, 1), np.diag([1, 0]), atol=1e-15)

    def test_bloch_vector_of_encoded_value(self):
        """x = 0.6 encodes (I + 0.8X + 0.6Z) / 2."""
        expected = 0.5 * (np.eye(2) + 0.8 * X + 0.6 * Z)
        np.testing.assert_allclose(input_density(0.6, 1), expected, atol=1e-15)

    def test_x_zero_on_two_qubits(self):
        """x = 0 gives <Z> = 0 and <X> = 1 on each qubit."""
        rho = DensityMatrix(input_density(0.0, 2), 2)
        for q in range(2):
            assert np.trace(rho.matrix @ embed(Z, q, 2)).real == pytest.approx(0.0, abs=1e-15)
            assert np.trace(rho.matrix @ embed(X, q, 2)).real == pytest.approx(1.0, abs=1e-15)

    def test_out_of_range_input(self):
        """|x| > 1 is never clamped at the encoder."""
        with pytest.raises(DomainError):
            build_input_unitary(1.01, 1)


class TestInteractionHamiltonian:
    """H_int = sum a_j X_j + sum J_jk Z_j Z_k."""

    def test_zero_coefficients(self):
        """All-zero coefficients give the zero matrix."""
        arch = QrnnArchitecture.uncoupled(1, 2, 1)
        assert not np.any(build_interaction_hamiltonian(arch).matrix)

    def test_single_field(self):
        """a_0 = 1 gives X on qubit 0."""
        arch = QrnnArchitecture(1, 1, 1, 0.1, (1.0, 0.0), (0.0,))
        np.testing.assert_array_equal(build_interaction_hamiltonian(arch).matrix, embed(X, 0, 2))

    def test_zz_coupling(self):
        """J_10 = 1 gives Z (x) Z."""
        arch = QrnnArchitecture(1, 1, 1, 0.1, (0.0, 0.0), (1.0,))
        np.testing.assert_array_equal(build_interaction_hamiltonian(arch).matrix, np.kron(Z, Z))

    def test_propagator_is_cached(self):
        """Equal architectures share one propagator."""
        arch = make_architecture(1, 2, 1, 0.3)
        assert interaction_propagator(arch) is interaction_propagator(make_architecture(1, 2, 1, 0.3))


class TestEvolutionUnitary:
    """Layer ordering and conventions."""

    def test_identity_at_zero(self):
        """tau = 0 with zero angles is the identity."""
        arch = make_architecture(2, 1, 3, 0.0)
        np.testing.assert_allclose(build_evolution_unitary(arch, QrnnParameters.initial(arch)), np.eye(8), atol=1e-15)

    def test_single_layer_zero_angles(self):
        """D = 1 with zero angles is exp(-i H_int tau)."""
        arch = make_architecture(2, 1, 1, 0.45)
        h = build_interaction_hamiltonian(arch).matrix
        np.testing.assert_allclose(
            build_evolution_unitary(arch, QrnnParameters.initial(arch)), expm(-0.45j * h), atol=1e-12
        )

    def test_two_layers_without_interaction(self, rng):
        """tau = 0: R_2 R_1 from independently composed single-qubit gates."""
        arch = make_architecture(1, 1, 2, 0.0)
        params = QrnnParameters.random(arch, rng)
        layers = [
            np.kron(single_qubit_rotation(*params.angles[d, 0]), single_qubit_rotation(*params.angles[d, 1]))
            for d in range(2)
        ]
        np.testing.assert_allclose(build_evolution_unitary(arch, params), layers[1] @ layers[0], atol=1e-14)

    def test_matches_brute_force(self, rng):
        """Agrees with a scipy-expm construction."""
        arch = make_architecture(2, 2, 3, 0.6)
        params = QrnnParameters.random(arch, rng)
        np.testing.assert_allclose(build_evolution_unitary(arch, params), brute_force_unitary(arch, params), atol=1e-12)

    def test_parameter_length_mismatch(self):
        """Parameters for another architecture are rejected."""
        arch = make_architecture(2, 1, 2, 0.2)
        other = make_architecture(2, 1, 1, 0.2)
        with pytest.raises(DimensionMismatchError):
            build_evolution_unitary(arch, QrnnParameters.initial(other))


class TestStep:
    """Encode, evolve, measure, reset."""

    def test_pass_through_at_zero_tau(self, rng):
        """tau = 0, theta = 0, c_out = 1 returns y_bar = x from any memory state."""
        arch = make_architecture(2, 2, 2, 0.0)
        params = QrnnParameters.initial(arch)
        rho = DensityMatrix.from_pure(rng.normal(size=4) + 1j * rng.normal(size=4))
        state = initial_state(arch, params)
        state = type(state)(rho, state.unitary, params, state.arch)
        for x in (-1.0, -0.3, 0.0, 0.8):
            _, z, y_bar = qrnn_step(state, x, arch, params)
            assert y_bar == pytest.approx(x, abs=1e-12)
            assert z == pytest.approx([x, x], abs=1e-12)

    def test_matches_state_vector_oracle(self, rng):
        """First step agrees with a brute-force pure-state simulation."""
        arch = make_architecture(2, 2, 2, 0.35)
        params = QrnnParameters.random(arch, rng)
        x = 0.42

        b = np.array([np.cos(0.5 * np.arccos(x)), np.sin(0.5 * np.arccos(x))])
        psi = reduce(np.kron, [np.array([1.0, 0.0])] * arch.n_A + [b] * arch.n_B)
        psi = brute_force_unitary(arch, params) @ psi
        z = [np.vdot(psi, embed(Z, q, arch.n) @ psi).real for q in range(arch.n_A, arch.n)]

        _, z_step, y_bar = qrnn_step(initial_state(arch, params), x, arch, params)
        assert z_step == pytest.approx(z, abs=1e-12)
        assert y_bar == pytest.approx(params.c_out * np.mean(z), abs=1e-12)

    def test_output_bounded_by_scale(self, rng):
        """|y_bar| <= |c_out|."""
        arch = make_architecture(3, 3, 1, 0.2)
        params = QrnnParameters.random(arch, rng, c_out=1.3)
        for y in run_teacher_forced(arch, params, rng.uniform(-1, 1, 10)):
            assert abs(y) <= 1.3 + 1e-12

    def test_rebuilds_unitary_for_new_parameters(self, rng):
        """A state built from other parameters is not reused."""
        arch = make_architecture(1, 1, 1, 0.5)
        params = QrnnParameters.random(arch, rng)
        stale = initial_state(arch, QrnnParameters.initial(arch))
        _, _, y_stale = qrnn_step(stale, 0.3, arch, params)
        _, _, y_fresh = qrnn_step(initial_state(arch, params), 0.3, arch, params)
        assert y_stale == y_fresh

    def test_rebuilds_unitary_for_new_architecture(self, rng):
        """Same parameters under another tau get a fresh unitary."""
        arch = make_architecture(1, 1, 1, 0.2)
        params = QrnnParameters.random(arch, rng)
        longer = arch.with_tau(1.5)
        stale = initial_state(arch, params)
        new_state, _, y_stale = qrnn_step(stale, 0.3, longer, params)
        _, _, y_fresh = qrnn_step(initial_state(longer, params), 0.3, longer, params)
        assert y_stale == y_fresh
        assert new_state.arch == longer
        np.testing.assert_allclose(new_state.unitary, build_evolution_unitary(longer, params), atol=1e-14)

    def test_memory_erasure_at_zero_tau(self, rng):
        """Without interaction rho_A evolves by the A-local rotations only, whatever x is."""
        arch = make_architecture(2, 1, 2, 0.0)
        params = QrnnParameters.random(arch, rng)
        local = np.eye(4, dtype=complex)
        for d in range(arch.depth):
            local = np.kron(single_qubit_rotation(*params.angles[d, 0]),
                            single_qubit_rotation(*params.angles[d, 1])) @ local
        expected = local @ DensityMatrix.zero_state(2).matrix @ local.conj().T

        for x in (-0.9, 0.1, 0.7):
            state, _, _ = qrnn_step(initial_state(arch, params), x, arch, params)
            np.testing.assert_allclose(state.rho_A.matrix, expected, atol=1e-12)


class TestTeacherForced:
    """Runs feeding the true series."""

    @pytest.mark.parametrize('series', [gen_cosine(), gen_triangle()], ids=['cosine', 'triangle'])
    def test_identity_pass_through(self, series):
        """tau = 0, theta = 0, c_out = 1 reproduces every input."""
        arch = make_architecture(3, 3, 3, 0.0)
        outputs = run_teacher_forced(arch, QrnnParameters.initial(arch), series.values)
        np.testing.assert_allclose(outputs, series.values, atol=1e-12)

    def test_identity_pass_through_spin(self):
        """Pass-through also holds on the spin-chain series."""
        series = gen_spin_series(total_len=120, train_len=50, initial_state='r00')
        arch = make_architecture(3, 3, 3, 0.0)
        outputs = run_teacher_forced(arch, QrnnParameters.initial(arch), series.values)
        np.testing.assert_allclose(outputs, series.values, atol=1e-12)

    def test_empty_inputs(self):
        """No inputs, no outputs."""
        arch = make_architecture(1, 1, 1, 0.2)
        assert run_teacher_forced(arch, QrnnParameters.initial(arch), []) == []

    def test_rejects_out_of_range(self):
        """The whole sequence is validated."""
        arch = make_architecture(1, 1, 1, 0.2)
        with pytest.raises(DomainError):
            run_teacher_forced(arch, QrnnParameters.initial(arch), [0.1, 1.5])

    def test_deterministic(self, rng):
        """Repeated runs are bit-identical."""
        arch = make_architecture(2, 2, 2, 0.3)
        params = QrnnParameters.random(arch, rng)
        inputs = rng.uniform(-1, 1, 12)
        assert run_teacher_forced(arch, params, inputs) == run_teacher_forced(arch, params, inputs)

    def test_invariants_over_long_run(self, rng):
        """Every density matrix of a 100-step run is valid."""
        arch = make_architecture(2, 1, 2, 0.8)
        params = QrnnParameters.random(arch, rng)
        assert verify_trajectory(arch, params, rng.uniform(-1, 1, 100)) == 100

    def test_sequence_keeps_memory_states(self, rng):
        """run_sequence returns rho_A before every step and after the last."""
        arch = make_architecture(1, 1, 1, 0.3)
        result = run_sequence(arch, QrnnParameters.random(arch, rng), [0.1, 0.2, 0.3])
        assert len(result['states']) == 4
        assert len(result['outputs']) == len(result['mean_z']) == 3


class TestFunctionSpace:
    """Outputs of an n_B = 1 QRNN are linear in fixed nonlinear features."""

    def _residual(self, features, values):
        coefficients, *_ = np.linalg.lstsq(features, values, rcond=None)
        return np.max(np.abs(features @ coefficients - values))

    def test_first_output(self, rng):
        """y_bar_0 lies in span{x0, sqrt(1 - x0^2), 1}."""
        arch = make_architecture(2, 1, 2, 0.7)
        params = QrnnParameters.random(arch, rng)
        xs = np.linspace(-0.95, 0.95, 10)
        values = np.array([run_teacher_forced(arch, params, [x])[0] for x in xs])
        features = np.column_stack([xs, np.sqrt(1 - xs ** 2), np.ones_like(xs)])
        assert self._residual(features, values) < 1e-9

    def test_second_output(self, rng):
        """y_bar_1 lies in the span of products of the single-step features."""
        arch = make_architecture(2, 1, 2, 0.7)
        params = QrnnParameters.random(arch, rng)
        grid = np.linspace(-0.9, 0.9, 5)
        rows, values = [], []
        for x0 in grid:
            for x1 in grid:
                s0, s1 = np.sqrt(1 - x0 ** 2), np.sqrt(1 - x1 ** 2)
                rows.append([x0, x1, s0, s1, x0 * x1, x0 * s1, x1 * s0, s0 * s1, 1.0])
                values.append(run_teacher_forced(arch, params, [x0, x1])[1])
        assert self._residual(np.array(rows), np.array(values)) < 1e-8


class TestClosedLoop:
    """Feeding predictions back."""

    def test_zero_horizon(self, rng):
        """horizon = 0 returns only y_bar_{T-1}."""
        arch = make_architecture(1, 1, 1, 0.2)
        params = QrnnParameters.random(arch, rng)
        inputs = [0.1, 0.4, -0.2]
        assert run_closed_loop(arch, params, inputs, 0) == [run_teacher_forced(arch, params, inputs)[-1]]

    def test_pass_through_fixed_point(self):
        """tau = 0, theta = 0: every prediction equals x_{T-1}."""
        arch = make_architecture(2, 1, 1, 0.0)
        predictions = run_closed_loop(arch, QrnnParameters.initial(arch), [0.2, -0.3, 0.45], 6)
        assert len(predictions) == 7
        assert predictions == pytest.approx([0.45] * 7, abs=1e-12)

    def test_predictions_bounded(self, rng):
        """|prediction| <= |c_out| even when it exceeds the encodable range."""
        arch = make_architecture(2, 1, 2, 0.5)
        params = QrnnParameters.random(arch, rng, c_out=1.8)
        for y in run_closed_loop(arch, params, [0.5, 0.6], 20):
            assert abs(y) <= 1.8 + 1e-12

    def test_negative_horizon(self):
        """A negative horizon is an error."""
        arch = make_architecture(1, 1, 1, 0.2)
        with pytest.raises(ValueError):
            run_closed_loop(arch, QrnnParameters.initial(arch), [0.1], -1)

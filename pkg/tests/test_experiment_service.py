"""Tests for seeding, the experiment runners and their artifacts."""
import numpy as np
import pytest

from qrnn.exceptions import ConfigError
from qrnn.models import ExperimentConfig, QrnnParameters
from qrnn.services.dataset_service import gen_cosine
from qrnn.services.experiment_service import (
    build_architecture,
    predict_series,
    run_demo,
    run_grad_check,
    run_predict,
    run_tau_sweep,
    run_train,
    sample_hamiltonian_coefficients,
    score_test_window,
    series_for_config,
    with_spin_signal,
)
from qrnn.services.storage_service import read_csv, read_key_values
from qrnn.utils.helpers import SplitMix64, stream_seed
from tests.conftest import make_architecture


@pytest.fixture
def tiny_config(settings, tmp_path):
    """Two seeds of a 1 + 1 qubit model on a short cosine."""
    return ExperimentConfig.from_settings(
        settings, 'cosine',
        n_A=1, n_B=1, depth=1, total_len=30, train_len=20, test_window=5,
        max_iterations=3, output_dir=str(tmp_path), tau_grid=(0.0, 0.5),
    )


class TestSeeding:
    """SplitMix64 streams and Hamiltonian draws."""

    def test_splitmix_reference_values(self):
        """Seed 0 gives the published first outputs."""
        stream = SplitMix64(0)
        assert stream.next_u64() == 0xE220A8397B1DCDAF
        assert stream.next_u64() == 0x6E789E6AA1B965F4
        assert stream.next_u64() == 0x06C45D188009454F

    def test_stream_seed_index_zero(self):
        """Seed index 0 uses the master seed itself."""
        assert stream_seed(20201, 0) == 20201

    def test_draw_count_and_range(self):
        """n fields plus n(n-1)/2 couplings, all in [-1, 1]."""
        a, J = sample_hamiltonian_coefficients(20201, 3, 6)
        assert len(a) == 6
        assert len(J) == 15
        assert all(-1.0 <= v <= 1.0 for v in a + J)

    def test_draws_deterministic(self):
        """Same seed, same Hamiltonian; another index, another Hamiltonian."""
        assert sample_hamiltonian_coefficients(5, 1, 4) == sample_hamiltonian_coefficients(5, 1, 4)
        assert sample_hamiltonian_coefficients(5, 1, 4) != sample_hamiltonian_coefficients(5, 2, 4)

    def test_architecture_shares_draw_across_tau(self, tiny_config):
        """A seed index fixes H_int whatever tau is."""
        first = build_architecture(tiny_config, 1, tau=0.1)
        second = build_architecture(tiny_config, 1, tau=5.0)
        assert first.a == second.a
        assert first.J == second.J


class TestPrediction:
    """Teacher-forced then closed-loop predictions."""

    def test_prediction_layout(self):
        """None at t = 0, then one value per later time step."""
        series = gen_cosine(30, 20)
        arch = make_architecture(1, 1, 1, 0.0)
        predictions = predict_series(arch, QrnnParameters.initial(arch), series)
        assert len(predictions) == 30
        assert predictions[0] is None
        # pass-through: teacher forcing echoes x_{t-1}, the closed loop holds x_19
        assert predictions[5] == pytest.approx(series.values[4], abs=1e-12)
        assert predictions[25] == pytest.approx(series.values[19], abs=1e-12)

    def test_score_window(self):
        """MSE over the first test_window predictions only."""
        series = gen_cosine(30, 20)
        predictions = [None] + list(series.values[1:])
        predictions[20] = series.values[20] + 0.1
        predictions[29] = 5.0
        assert score_test_window(series, predictions, 5) == pytest.approx(0.002)


class TestDemo:
    """Seed loop, summary and artifacts."""

    def test_demo_writes_artifacts(self, tiny_config, tmp_path):
        """Summary, result CSV, parameters, architecture and plot."""
        outcome = run_demo(tiny_config)
        assert outcome['success']
        assert outcome['best_seed'] in (0, 1)

        summary = read_csv(tmp_path / 'cosine_summary.csv')
        assert [row['seed'] for row in summary] == ['0', '1']
        assert all(row['status'] == 'ok' for row in summary)
        assert min(float(row['mse']) for row in summary) == pytest.approx(outcome['best_mse'])

        rows = read_csv(tmp_path / 'cosine_result.csv')
        assert len(rows) == 30
        assert rows[0]['y_trained'] == ''
        assert {row['phase'] for row in rows[:20]} == {'train'}
        assert {row['phase'] for row in rows[20:]} == {'test'}
        for name in ('cosine_params.txt', 'cosine_architecture.txt', 'cosine.svg'):
            assert (tmp_path / name).exists()

    def test_result_csv_reparses_to_predictions(self, tiny_config, tmp_path):
        """17 significant digits bring back the exact in-memory floats."""
        outcome = run_demo(tiny_config)
        rows = read_csv(tmp_path / 'cosine_result.csv')
        series = gen_cosine(30, 20)
        for t, row in enumerate(rows):
            assert float(row['x_true']) == float(series.values[t])
            if t > 0:
                assert float(row['y_trained']) == outcome['predictions'][t]

    def test_initial_output_echoes_input_without_interaction(self, settings, tmp_path):
        """With tau = 0 the untrained model returns x_t unchanged."""
        config = ExperimentConfig.from_settings(
            settings, 'cosine',
            n_A=1, n_B=1, depth=1, total_len=30, train_len=20, test_window=5,
            n_seeds=1, max_iterations=1, tau=0.0, output_dir=str(tmp_path),
        )
        run_demo(config)
        for row in read_csv(tmp_path / 'cosine_result.csv'):
            assert float(row['y_initial']) == pytest.approx(float(row['x_true']), abs=1e-12)

    def test_saved_model_predicts_same(self, tiny_config, tmp_path):
        """run_predict on the saved files reproduces the best seed's MSE."""
        outcome = run_demo(tiny_config)
        reloaded = run_predict(tiny_config, tmp_path / 'cosine_params.txt', tmp_path / 'cosine_architecture.txt')
        assert reloaded['mse'] == outcome['best_mse']
        assert (tmp_path / 'cosine_prediction.csv').exists()

    def test_train_single_seed(self, tiny_config, tmp_path):
        """run_train names its files after the seed index."""
        outcome = run_train(tiny_config, seed_index=1)
        assert outcome['success']
        assert (tmp_path / 'cosine_seed1_params.txt').exists()
        summary = read_csv(tmp_path / 'cosine_seed1_summary.csv')
        assert summary[0]['seed'] == '1'

    def test_demo_deterministic(self, settings, tmp_path):
        """Two runs write identical summaries."""
        paths = []
        for name in ('first', 'second'):
            config = ExperimentConfig.from_settings(
                settings, 'triangle', n_A=1, n_B=1, depth=1, total_len=25, train_len=15,
                test_window=5, max_iterations=2, n_seeds=1, output_dir=str(tmp_path / name),
            )
            run_demo(config)
            paths.append(tmp_path / name / 'triangle_summary.csv')
        assert paths[0].read_text() == paths[1].read_text()


class TestTauSweep:
    """Evolution-time sweep."""

    def test_sweep_rows_sorted(self, tiny_config, tmp_path):
        """One row per (tau, seed), ordered by tau then seed."""
        outcome = run_tau_sweep(tiny_config)
        rows = read_csv(tmp_path / 'tau_sweep.csv')
        assert [(float(r['tau']), int(r['seed'])) for r in rows] == [(0.0, 0), (0.0, 1), (0.5, 0), (0.5, 1)]
        assert set(outcome['medians']) == {0.0, 0.5}
        assert (tmp_path / 'tau_sweep.svg').exists()

    def test_explicit_grid(self, tiny_config):
        """A grid argument replaces the configured one."""
        outcome = run_tau_sweep(tiny_config, tau_grid=[0.2])
        assert list(outcome['medians']) == [0.2]
        assert len(outcome['rows']) == 2

    def test_empty_grid(self, tiny_config):
        """No evolution times is a configuration error."""
        with pytest.raises(ConfigError):
            run_tau_sweep(tiny_config, tau_grid=[])


class TestGradientCheck:
    """Three-way gradient comparison report."""

    def test_report(self, tiny_config, tmp_path):
        """Analytic methods agree and the shift cost is reported."""
        outcome = run_grad_check(tiny_config)
        report = outcome['report']
        assert outcome['success']
        assert report['sensitivity_vs_shift'] <= 1e-7
        assert report['sensitivity_vs_shift'] <= report['sensitivity_vs_shift_per_entry'] <= 1e-7
        assert report['sensitivity_vs_finite_difference'] <= 1e-4
        assert report['n_params'] == 19
        assert report['shift_evaluations'] == 2 * 5 * 18
        assert report['single_parameter_evaluations'] == 10

        saved = read_key_values(tmp_path / 'grad_check.txt')
        assert saved['passed'] == 'true'
        assert saved['single_parameter_evaluations'] == '10'


class TestExperimentConfig:
    """Defaults, overrides and validation."""

    def test_task_defaults(self, settings):
        """The spin task uses 500 / 200 points and tau = 0.18."""
        config = ExperimentConfig.from_settings(settings, 'spin')
        assert (config.total_len, config.train_len, config.tau) == (500, 200, 0.18)

    def test_training_keys_routed(self, settings):
        """BFGS settings land on the TrainConfig."""
        config = ExperimentConfig.from_settings(settings, 'cosine', max_iterations=7, wolfe_c2=0.5)
        assert config.train.max_iterations == 7
        assert config.train.wolfe_c2 == 0.5

    def test_window_larger_than_test_split(self, settings):
        """test_window cannot exceed the test points."""
        with pytest.raises(ConfigError):
            ExperimentConfig.from_settings(settings, 'cosine', test_window=150)

    def test_unknown_task(self, settings):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_settings(settings, 'sawtooth')

    def test_seed_must_fit_64_bits(self, settings):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_settings(settings, 'cosine', master_seed=1 << 64)

    def test_wolfe_constants_ordered(self, settings):
        """c1 < c2 is required."""
        with pytest.raises(ConfigError):
            ExperimentConfig.from_settings(settings, 'cosine', wolfe_c1=0.5, wolfe_c2=0.4)

    def test_overrides(self, settings):
        config = ExperimentConfig.from_settings(settings, 'cosine').with_overrides(output_dir='elsewhere', master_seed=3)
        assert config.output_dir == 'elsewhere'
        assert config.master_seed == 3
        assert np.isclose(config.tau, 0.2)


class TestSpinStart:
    """Fallback from a parity-even spin start."""

    def spin_config(self, settings, tmp_path, state):
        return ExperimentConfig.from_settings(
            settings, 'spin', n_A=1, n_B=1, depth=1, total_len=30, train_len=20,
            test_window=5, spin_initial_state=state, output_dir=str(tmp_path),
        )

    def test_flat_series_switches_start(self, settings, tmp_path):
        """|000> gives <X_1> = 0 throughout, so |r00> is used."""
        config = self.spin_config(settings, tmp_path, '000')
        assert np.max(np.abs(series_for_config(config).values)) == pytest.approx(0.0, abs=1e-12)

        switched = with_spin_signal(config)
        assert switched.spin_initial_state == 'r00'
        assert np.max(np.abs(series_for_config(switched).values)) > 1e-3

    def test_oscillating_start_kept(self, settings, tmp_path):
        config = self.spin_config(settings, tmp_path, 'r00')
        assert with_spin_signal(config) is config

    def test_other_tasks_untouched(self, tiny_config):
        assert with_spin_signal(tiny_config) is tiny_config

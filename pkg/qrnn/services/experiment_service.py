"""
Experiment runners: demo, tau sweep, gradient check, single-seed train and predict.

Each runner writes its artifacts under config.output_dir and returns a dict
describing what happened. Per-seed and per-cell failures are recorded and
the run continues.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Optional

import numpy as np

from qrnn.exceptions import ConfigError, QrnnError
from qrnn.models import ExperimentConfig, QrnnArchitecture, QrnnParameters, SweepResultRow, TimeSeries
from qrnn.models.density import set_invariant_checks
from qrnn.services.dataset_service import generate_series
from qrnn.services.gradient_service import (
    grad_finite_difference,
    grad_forward_sensitivity,
    grad_parameter_shift,
)
from qrnn.services.plot_service import PlotSeries, PlotStyle, emit_svg_plot
from qrnn.services.qrnn_service import run_closed_loop, run_teacher_forced
from qrnn.services.storage_service import (
    DATA_SCHEMA,
    RESULT_SCHEMA,
    SUMMARY_SCHEMA,
    SWEEP_SCHEMA,
    emit_csv,
    load_architecture,
    load_parameters,
    save_architecture,
    save_parameters,
    write_key_values,
)
from qrnn.services.training_service import mse, train_qrnn
from qrnn.utils.helpers import SplitMix64, entrywise_discrepancy, median, relative_discrepancy, stream_seed
from qrnn.utils.validators import validate_tau_grid

logger = logging.getLogger(__name__)

# Gradient-check instance
GRAD_CHECK_SHAPE = {'n_A': 2, 'n_B': 1, 'depth': 2, 'steps': 5}
ANALYTIC_TOL = 1e-7
FINITE_DIFFERENCE_TOL = 1e-4
FINITE_DIFFERENCE_STEP = 1e-5

# Spin start used when the configured one leaves <X_1> identically zero
SPIN_FALLBACK_STATE = 'r00'
FLAT_SIGNAL_TOL = 1e-12


def sample_hamiltonian_coefficients(master_seed: int, seed_index: int, n: int) -> tuple:
    """
    Field coefficients a_0..a_{n-1}, then couplings J_jk (j ascending, k < j),
    all uniform on [-1, 1] from one SplitMix64 stream.
    """
    stream = SplitMix64(stream_seed(master_seed, seed_index))
    a = [stream.next_symmetric() for _ in range(n)]
    J = [stream.next_symmetric() for _ in range(n * (n - 1) // 2)]
    return a, J


def build_architecture(config: ExperimentConfig, seed_index: int, tau: Optional[float] = None) -> QrnnArchitecture:
    a, J = sample_hamiltonian_coefficients(config.master_seed, seed_index, config.n_A + config.n_B)
    return QrnnArchitecture(
        config.n_A, config.n_B, config.depth,
        config.tau if tau is None else tau,
        a, J
    )


def series_for_config(config: ExperimentConfig) -> TimeSeries:
    return generate_series(
        config.task, config.total_len, config.train_len,
        substeps=config.lindblad_substeps,
        spin_initial_state=config.spin_initial_state
    )


def with_spin_signal(config: ExperimentConfig) -> ExperimentConfig:
    """
    Swap a parity-even spin start for SPIN_FALLBACK_STATE when its <X_1>
    series is flat. Other tasks and non-flat series come back unchanged.
    """
    if config.task != 'spin':
        return config
    series = series_for_config(config)
    if np.max(np.abs(series.values)) > FLAT_SIGNAL_TOL:
        return config

    logger.warning(
        f'Spin series from |{config.spin_initial_state}> is identically zero; '
        f'using |{SPIN_FALLBACK_STATE}> instead'
    )
    return replace(config, spin_initial_state=SPIN_FALLBACK_STATE)


def predict_series(arch: QrnnArchitecture, params: QrnnParameters, series: TimeSeries) -> list:
    """
    Prediction of x_t for every t (None at t = 0).

    Teacher-forced y_bar_{t-1} inside the training window, closed-loop from
    x_{train_len} on.
    """
    train = series.train_len
    teacher_forced = run_teacher_forced(arch, params, series.values[:train - 1])
    closed_loop = run_closed_loop(arch, params, series.values[:train], len(series) - train - 1)
    return [None] + teacher_forced + closed_loop


def score_test_window(series: TimeSeries, predictions: list, test_window: int) -> float:
    """MSE over the first test_window closed-loop predictions."""
    start = series.train_len
    return mse(predictions[start:start + test_window], series.values[start:start + test_window])


def build_result_rows(series: TimeSeries, initial_outputs: list, predictions: list) -> list:
    return [
        {
            't': t,
            'x_true': float(series.values[t]),
            'y_initial': initial_outputs[t],
            'y_trained': predictions[t],
            'phase': series.phase(t),
        }
        for t in range(len(series))
    ]


def train_seed(config: ExperimentConfig, series: TimeSeries, seed_index: int,
               tau: Optional[float] = None, gradient: str = 'sensitivity') -> dict:
    """
    Train one Hamiltonian draw and score it on the test window.

    Returns dict with success status; failures carry 'error'.
    """
    tau = config.tau if tau is None else tau
    try:
        arch = build_architecture(config, seed_index, tau)
        result = train_qrnn(arch, series, config.train, gradient=gradient)
        predictions = predict_series(arch, result.final_params, series)
        score = score_test_window(series, predictions, config.test_window)

        logger.info(f'Seed {seed_index} (tau={tau}): test MSE {score:.6g}, {result.iterations} iterations')
        return {
            'success': True,
            'seed': seed_index,
            'tau': tau,
            'arch': arch,
            'result': result,
            'predictions': predictions,
            'mse': score,
        }
    except (QrnnError, np.linalg.LinAlgError) as e:
        logger.error(f'Seed {seed_index} (tau={tau}) failed: {e}')
        return {'success': False, 'seed': seed_index, 'tau': tau, 'error': str(e)}


def _train_cell(payload: tuple) -> dict:
    config, series, seed_index, tau, gradient = payload
    set_invariant_checks(config.check_invariants)
    return train_seed(config, series, seed_index, tau, gradient)


def run_cells(config: ExperimentConfig, series: TimeSeries, cells: list, gradient: str = 'sensitivity') -> list:
    """Train every (tau, seed_index) cell, in a process pool when workers > 1."""
    payloads = [(config, series, seed_index, tau, gradient) for tau, seed_index in cells]
    if config.workers > 1 and len(payloads) > 1:
        logger.info(f'Running {len(payloads)} cells on {config.workers} workers')
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(_train_cell, payloads))
    return [_train_cell(payload) for payload in payloads]


def run_gen_data(config: ExperimentConfig) -> dict:
    series = series_for_config(config)
    rows = [
        {'t': t, 'x': float(x), 'phase': series.phase(t)}
        for t, x in enumerate(series.values)
    ]
    path = emit_csv(rows, DATA_SCHEMA, Path(config.output_dir) / f'{config.task}_data.csv')
    return {'success': True, 'series': series, 'files': {'data': path}}


def _summary_row(outcome: dict) -> dict:
    if not outcome['success']:
        return {
            'seed': outcome['seed'],
            'mse': None,
            'final_cost': None,
            'iterations': None,
            'converged': None,
            'status': f"failed: {outcome['error']}",
        }
    result = outcome['result']
    return {
        'seed': outcome['seed'],
        'mse': outcome['mse'],
        'final_cost': result.final_cost,
        'iterations': result.iterations,
        'converged': result.converged,
        'status': 'ok',
    }


def _write_model_outputs(config: ExperimentConfig, series: TimeSeries, outcome: dict, stem: str) -> dict:
    arch, result = outcome['arch'], outcome['result']
    initial_outputs = run_teacher_forced(arch, QrnnParameters.initial(arch), series.values)
    rows = build_result_rows(series, initial_outputs, outcome['predictions'])

    output_dir = Path(config.output_dir)
    files = {
        'result': emit_csv(rows, RESULT_SCHEMA, output_dir / f'{stem}_result.csv'),
        'params': save_parameters(result.final_params, output_dir / f'{stem}_params.txt'),
        'architecture': save_architecture(arch, output_dir / f'{stem}_architecture.txt'),
    }

    t = list(range(len(series)))
    plot = [
        PlotSeries('x_t', t, [row['x_true'] for row in rows], color='#000000'),
        PlotSeries('initial output', t, initial_outputs, color='#2ca02c', dashed=True),
        PlotSeries('trained output', t, outcome['predictions'], color='#d62728'),
    ]
    style = PlotStyle(
        title=f'{series.name}: tau={arch.tau}, test MSE={outcome["mse"]:.3g}',
        x_label='t', y_label='x_t', boundary=series.train_len - 0.5
    )
    files['plot'] = emit_svg_plot(plot, style, output_dir / f'{stem}.svg')
    return files


def run_demo(config: ExperimentConfig, gradient: str = 'sensitivity') -> dict:
    """
    Train one QRNN per seed and keep the best by test MSE.

    Writes result CSV, summary CSV, parameter/architecture files and the
    SVG plot for the best seed.
    """
    set_invariant_checks(config.check_invariants)
    series = series_for_config(config)
    logger.info(f'Demo {config.task}: {config.n_seeds} seeds, tau={config.tau}')

    outcomes = run_cells(config, series, [(config.tau, i) for i in range(config.n_seeds)], gradient)
    summary = [_summary_row(outcome) for outcome in outcomes]
    output_dir = Path(config.output_dir)
    files = {'summary': emit_csv(summary, SUMMARY_SCHEMA, output_dir / f'{config.task}_summary.csv')}

    successful = [outcome for outcome in outcomes if outcome['success']]
    if not successful:
        logger.error(f'Demo {config.task}: every seed failed')
        return {'success': False, 'error': 'every seed failed', 'summary': summary, 'files': files}

    best = min(successful, key=lambda outcome: (outcome['mse'], outcome['seed']))
    files.update(_write_model_outputs(config, series, best, config.task))

    logger.info(f"Demo {config.task}: best seed {best['seed']} with test MSE {best['mse']:.6g}")
    return {
        'success': True,
        'best_seed': best['seed'],
        'best_mse': best['mse'],
        'predictions': best['predictions'],
        'summary': summary,
        'files': files,
    }


def run_tau_sweep(config: ExperimentConfig, tau_grid=None, gradient: str = 'sensitivity') -> dict:
    """
    Train every (tau, seed) cell; Hamiltonian draws are shared across tau.

    Writes the sweep CSV (sorted by tau then seed) and a log-scale plot of
    per-seed MSE with the per-tau median.
    """
    grid = tuple(float(t) for t in (tau_grid if tau_grid is not None else config.tau_grid))
    if not validate_tau_grid(grid):
        raise ConfigError(f'Invalid tau grid {grid}')

    set_invariant_checks(config.check_invariants)
    series = series_for_config(config)
    cells = [(tau, seed_index) for tau in grid for seed_index in range(config.n_seeds)]
    logger.info(f'Tau sweep on {config.task}: {len(grid)} values x {config.n_seeds} seeds')

    outcomes = run_cells(config, series, cells, gradient)
    rows = sorted(
        (
            SweepResultRow(tau, outcome['seed'], outcome['mse'])
            if outcome['success']
            else SweepResultRow(tau, outcome['seed'], None, f"failed: {outcome['error']}")
            for (tau, _), outcome in zip(cells, outcomes)
        ),
        key=lambda row: (row.tau, row.seed_index)
    )

    medians = {tau: median([row.test_mse for row in rows if row.tau == tau]) for tau in grid}
    output_dir = Path(config.output_dir)
    files = {'sweep': emit_csv([row.to_dict() for row in rows], SWEEP_SCHEMA, output_dir / 'tau_sweep.csv')}

    ok_rows = [row for row in rows if row.test_mse is not None]
    plotted_medians = [(tau, m) for tau, m in medians.items() if np.isfinite(m)]
    if ok_rows:
        plot = [
            PlotSeries('seed', [row.tau for row in ok_rows], [row.test_mse for row in ok_rows], kind='scatter'),
            PlotSeries('median', [t for t, _ in plotted_medians], [m for _, m in plotted_medians], color='#000000'),
        ]
        style = PlotStyle(title=f'{config.task}: test MSE vs tau', x_label='tau', y_label='MSE', log_y=True)
        files['plot'] = emit_svg_plot(plot, style, output_dir / 'tau_sweep.svg')

    for tau, m in medians.items():
        logger.info(f'tau={tau}: median test MSE {m:.6g}')
    return {'success': True, 'rows': rows, 'medians': medians, 'files': files}


def _grad_check_instance(config: ExperimentConfig, depth: int) -> tuple:
    shape = GRAD_CHECK_SHAPE
    n = shape['n_A'] + shape['n_B']
    a, J = sample_hamiltonian_coefficients(config.master_seed, 0, n)
    arch = QrnnArchitecture(shape['n_A'], shape['n_B'], depth, config.tau, a, J)

    rng = np.random.default_rng(config.master_seed)
    params = QrnnParameters.random(arch, rng)
    inputs = list(rng.uniform(-0.9, 0.9, shape['steps']))
    return arch, params, inputs, inputs[1:]


def run_grad_check(config: ExperimentConfig) -> dict:
    """
    Compare the three gradient evaluators on a small random instance.

    Discrepancies are reported against the largest entry and per entry.
    Fails when the two analytic methods disagree on any entry beyond 1e-7
    relative.
    """
    set_invariant_checks(config.check_invariants)
    arch, params, inputs, targets = _grad_check_instance(config, GRAD_CHECK_SHAPE['depth'])

    sensitivity = grad_forward_sensitivity(arch, params, inputs, targets).entries
    shift, shift_count = grad_parameter_shift(arch, params, inputs, targets)
    finite = grad_finite_difference(arch, params, inputs, targets, h=FINITE_DIFFERENCE_STEP).entries

    single_arch, single_params, single_inputs, single_targets = _grad_check_instance(config, 1)
    _, single_count = grad_parameter_shift(single_arch, single_params, single_inputs, single_targets, indices=[0])

    analytic = relative_discrepancy(sensitivity, shift.entries)
    sensitivity_fd = relative_discrepancy(sensitivity, finite)
    shift_fd = relative_discrepancy(shift.entries, finite)
    analytic_per_entry = entrywise_discrepancy(sensitivity, shift.entries)
    passed = analytic_per_entry <= ANALYTIC_TOL

    report = {
        'n_A': arch.n_A,
        'n_B': arch.n_B,
        'depth': arch.depth,
        'steps': len(inputs),
        'tau': arch.tau,
        'n_params': arch.n_params,
        'sensitivity_vs_shift': analytic,
        'sensitivity_vs_finite_difference': sensitivity_fd,
        'shift_vs_finite_difference': shift_fd,
        'sensitivity_vs_shift_per_entry': analytic_per_entry,
        'sensitivity_vs_finite_difference_per_entry': entrywise_discrepancy(sensitivity, finite),
        'finite_difference_step': FINITE_DIFFERENCE_STEP,
        'shift_evaluations': shift_count,
        'single_parameter_evaluations': single_count,
        'finite_difference_within_tolerance': max(sensitivity_fd, shift_fd) <= FINITE_DIFFERENCE_TOL,
        'passed': passed,
    }
    path = write_key_values(report, Path(config.output_dir) / 'grad_check.txt', header='Gradient check')

    if passed:
        logger.info(f'Gradient check passed: analytic discrepancy {analytic_per_entry:.3e} per entry, finite difference {sensitivity_fd:.3e}')
    else:
        logger.error(f'Gradient check failed: analytic discrepancy {analytic_per_entry:.3e} per entry exceeds {ANALYTIC_TOL}')
    return {'success': passed, 'report': report, 'files': {'report': path}}


def run_train(config: ExperimentConfig, seed_index: int = 0, gradient: str = 'sensitivity') -> dict:
    """Train a single Hamiltonian draw and persist its parameters."""
    set_invariant_checks(config.check_invariants)
    series = series_for_config(config)
    outcome = train_seed(config, series, seed_index, gradient=gradient)
    if not outcome['success']:
        return outcome

    stem = f'{config.task}_seed{seed_index}'
    files = _write_model_outputs(config, series, outcome, stem)
    emit_csv(
        [_summary_row(outcome)], SUMMARY_SCHEMA, Path(config.output_dir) / f'{stem}_summary.csv'
    )
    return {
        'success': True,
        'seed': seed_index,
        'mse': outcome['mse'],
        'result': outcome['result'],
        'files': files,
    }


def run_predict(config: ExperimentConfig, params_path, arch_path) -> dict:
    """Reload a trained model and regenerate its predictions on the task series."""
    set_invariant_checks(config.check_invariants)
    arch = load_architecture(arch_path)
    params = load_parameters(arch, params_path)
    series = series_for_config(config)

    predictions = predict_series(arch, params, series)
    score = score_test_window(series, predictions, config.test_window)
    initial_outputs = run_teacher_forced(arch, QrnnParameters.initial(arch), series.values)
    rows = build_result_rows(series, initial_outputs, predictions)
    path = emit_csv(rows, RESULT_SCHEMA, Path(config.output_dir) / f'{config.task}_prediction.csv')

    logger.info(f'Prediction on {config.task}: test MSE {score:.6g}')
    return {'success': True, 'mse': score, 'predictions': predictions, 'files': {'result': path}}

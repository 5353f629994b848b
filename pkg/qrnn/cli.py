"""Command-line interface."""
import functools
import logging

import click
from dotenv import load_dotenv

from qrnn import configure_logging, load_config
from qrnn.exceptions import ConfigError, QrnnError
from qrnn.services.storage_service import load_experiment_config
from qrnn.services.training_service import GRADIENT_METHODS

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_IO = 3

TASK_CHOICE = click.Choice(['cosine', 'triangle', 'spin'])


def _experiment_config(ctx, task=None):
    """Class defaults, then the --config file, then --task / --out / --seed."""
    options = ctx.obj
    return load_experiment_config(
        options['config_path'], options['settings'], task=task,
        output_dir=options['output_dir'], master_seed=options['master_seed']
    )


def handle_errors(f):
    """Map failures to exit codes: 1 check failure, 2 config, 3 I/O."""
    @functools.wraps(f)
    def decorated(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            outcome = f(*args, **kwargs)
        except ConfigError as e:
            click.echo(f'Configuration error: {e}', err=True)
            ctx.exit(EXIT_USAGE)
        except OSError as e:
            click.echo(f'I/O error: {e}', err=True)
            ctx.exit(EXIT_IO)
        except QrnnError as e:
            logger.error(f'{type(e).__name__}: {e}')
            click.echo(f'Failed: {e}', err=True)
            ctx.exit(EXIT_FAILURE)

        if isinstance(outcome, dict) and not outcome.get('success', True):
            click.echo(f"Failed: {outcome.get('error', 'check did not pass')}", err=True)
            ctx.exit(EXIT_FAILURE)
        return outcome
    return decorated


@click.group()
@click.option('--config', 'config_path', type=click.Path(dir_okay=False), default=None,
              help='Experiment config file (key = value lines).')
@click.option('--out', 'output_dir', default=None, help='Output directory.')
@click.option('--seed', 'master_seed', type=int, default=None, help='Master seed (unsigned 64-bit).')
@click.option('--env', default=None, help='Settings profile: development, production or testing.')
@click.option('--log-level', default=None, help='Root log level.')
@click.pass_context
def cli(ctx, config_path, output_dir, master_seed, env, log_level):
    """QRNN simulator and training harness."""
    load_dotenv()
    settings = load_config(env)
    configure_logging(settings, log_level)
    ctx.obj = {
        'settings': settings,
        'config_path': config_path,
        'output_dir': output_dir,
        'master_seed': master_seed,
    }


@cli.command('gen-data')
@click.option('--task', type=TASK_CHOICE, default=None)
@click.pass_context
@handle_errors
def gen_data(ctx, task):
    """Write a task series as CSV (t, x, phase)."""
    from qrnn.services.experiment_service import run_gen_data

    outcome = run_gen_data(_experiment_config(ctx, task))
    click.echo(f"Wrote {len(outcome['series'])} points to {outcome['files']['data']}")
    return outcome


@cli.command()
@click.option('--task', type=TASK_CHOICE, default=None)
@click.option('--seed-index', type=int, default=0, show_default=True, help='Hamiltonian draw.')
@click.option('--gradient', type=click.Choice(GRADIENT_METHODS), default='sensitivity', show_default=True)
@click.pass_context
@handle_errors
def train(ctx, task, seed_index, gradient):
    """Train one Hamiltonian draw and save its parameters."""
    from qrnn.services.experiment_service import run_train

    outcome = run_train(_experiment_config(ctx, task), seed_index, gradient)
    if outcome['success']:
        click.echo(f"Seed {seed_index}: test MSE {outcome['mse']:.6g}")
        click.echo(f"Parameters saved to {outcome['files']['params']}")
    return outcome


@cli.command()
@click.option('--params', 'params_path', type=click.Path(exists=True, dir_okay=False), required=True)
@click.option('--arch', 'arch_path', type=click.Path(exists=True, dir_okay=False), required=True)
@click.option('--task', type=TASK_CHOICE, default=None)
@click.pass_context
@handle_errors
def predict(ctx, params_path, arch_path, task):
    """Closed-loop prediction from saved parameters."""
    from qrnn.services.experiment_service import run_predict

    outcome = run_predict(_experiment_config(ctx, task), params_path, arch_path)
    click.echo(f"Test MSE {outcome['mse']:.6g}; predictions in {outcome['files']['result']}")
    return outcome


@cli.command()
@click.option('--task', type=TASK_CHOICE, default=None)
@click.option('--gradient', type=click.Choice(GRADIENT_METHODS), default='sensitivity', show_default=True)
@click.pass_context
@handle_errors
def demo(ctx, task, gradient):
    """Train every seed on a task and keep the best."""
    from qrnn.services.experiment_service import run_demo

    outcome = run_demo(_experiment_config(ctx, task), gradient)
    for row in outcome['summary']:
        click.echo(f"seed {row['seed']}: mse={row['mse']} status={row['status']}")
    if outcome['success']:
        click.echo(f"Best seed {outcome['best_seed']}: test MSE {outcome['best_mse']:.6g}")
    return outcome


@cli.command('tau-sweep')
@click.option('--task', type=TASK_CHOICE, default=None)
@click.option('--tau-grid', default=None, help='Comma-separated evolution times.')
@click.pass_context
@handle_errors
def tau_sweep(ctx, task, tau_grid):
    """Test MSE over a grid of evolution times."""
    from qrnn.services.experiment_service import run_tau_sweep

    grid = None
    if tau_grid is not None:
        try:
            grid = [float(t) for t in tau_grid.split(',') if t.strip()]
        except ValueError as e:
            raise ConfigError(f'Bad --tau-grid: {e}')

    outcome = run_tau_sweep(_experiment_config(ctx, task), grid)
    for tau, value in outcome['medians'].items():
        click.echo(f'tau={tau}: median MSE {value:.6g}')
    return outcome


@cli.command('grad-check')
@click.pass_context
@handle_errors
def grad_check(ctx):
    """Compare forward-sensitivity, parameter-shift and finite-difference gradients."""
    from qrnn.services.experiment_service import run_grad_check

    outcome = run_grad_check(_experiment_config(ctx))
    report = outcome['report']
    click.echo(f"sensitivity vs shift: {report['sensitivity_vs_shift']:.3e} "
               f"(per entry {report['sensitivity_vs_shift_per_entry']:.3e})")
    click.echo(f"sensitivity vs finite difference: {report['sensitivity_vs_finite_difference']:.3e}")
    click.echo(f"single-parameter shift evaluations: {report['single_parameter_evaluations']}")
    if not outcome['success']:
        outcome['error'] = 'analytic gradients disagree'
    return outcome


def main():
    cli(prog_name='qrnn')

#!/usr/bin/env python
"""
Reproduction script.
Runs the three demonstration tasks with the default settings and checks the
best-seed test MSE against the acceptance thresholds, then optionally runs
the tau sweep.

Run with: python scripts/reproduce_results.py [output_dir] [--sweep]
Exit code 1 when any threshold is missed.
"""
import os
import sys
import logging

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from dotenv import load_dotenv

from qrnn import load_config
from qrnn.models import ExperimentConfig
from qrnn.services.experiment_service import run_demo, run_tau_sweep, with_spin_signal

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

# Best-of-seeds test MSE over the first 25 prediction points
THRESHOLDS = {
    'cosine': 3.3e-3,
    'triangle': 2.6e-2,
    'spin': 3.0e-2,
}

# Median MSE at tau = 0 and tau = 10 must exceed the best mid-range median by this factor
SWEEP_FACTOR = 5.0
SWEEP_MID_RANGE = (0.1, 0.2, 0.5, 1.0)


def reproduce_task(settings, task: str, output_dir: str) -> bool:
    """Run one demo and compare with its threshold."""
    config = with_spin_signal(ExperimentConfig.from_settings(settings, task, output_dir=output_dir))
    try:
        outcome = run_demo(config)
    except Exception as e:
        logger.error(f'{task} demo error: {e}')
        return False

    if not outcome['success']:
        logger.error(f"{task}: {outcome.get('error')}")
        return False

    passed = outcome['best_mse'] <= THRESHOLDS[task]
    level = logging.INFO if passed else logging.ERROR
    logger.log(level, f"{task}: best seed {outcome['best_seed']} MSE {outcome['best_mse']:.4g} "
                      f"(threshold {THRESHOLDS[task]:.2g}) {'ok' if passed else 'FAILED'}")
    return passed


def reproduce_sweep(settings, output_dir: str) -> bool:
    """Run the tau sweep on the cosine task and check its shape."""
    config = ExperimentConfig.from_settings(settings, 'cosine', output_dir=output_dir)
    outcome = run_tau_sweep(config)
    medians = outcome['medians']

    best_mid = min(medians[tau] for tau in SWEEP_MID_RANGE if tau in medians)
    passed = all(
        medians.get(edge, float('inf')) >= SWEEP_FACTOR * best_mid
        for edge in (0.0, 10.0)
    )
    logger.info(f"tau sweep: best mid-range median {best_mid:.4g}, "
                f"tau=0 {medians.get(0.0, float('nan')):.4g}, tau=10 {medians.get(10.0, float('nan')):.4g} "
                f"{'ok' if passed else 'FAILED'}")
    return passed


def main():
    """Main entry point."""
    load_dotenv()
    settings = load_config(os.environ.get('QRNN_ENV', 'production'))

    args = [a for a in sys.argv[1:] if not a.startswith('--')]
    output_dir = args[0] if args else settings.OUTPUT_DIR

    logger.info(f'Reproducing demonstrations into {output_dir}')
    results = {task: reproduce_task(settings, task, os.path.join(output_dir, task)) for task in THRESHOLDS}

    if '--sweep' in sys.argv:
        results['tau-sweep'] = reproduce_sweep(settings, os.path.join(output_dir, 'tau_sweep'))

    failed = [name for name, passed in results.items() if not passed]
    if failed:
        logger.error(f'Reproduction failed for: {", ".join(failed)}')
        sys.exit(1)
    logger.info('All reproduction checks passed')


if __name__ == '__main__':
    main()

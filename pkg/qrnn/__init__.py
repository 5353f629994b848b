"""Quantum recurrent neural network simulator and training harness."""
import logging
import os

from qrnn.config import config

__version__ = '0.1.0'


def load_config(config_name=None):
    """Resolve the configuration class for the current environment."""
    if config_name is None:
        config_name = os.environ.get('QRNN_ENV', 'development')

    settings = config.get(config_name, config['default'])

    # Invariant checks are a process-wide switch on the density-matrix type
    from qrnn.models.density import set_invariant_checks
    set_invariant_checks(settings.CHECK_INVARIANTS)

    return settings


def configure_logging(settings, level=None):
    """Configure root logging the way the batch scripts expect."""
    logging.basicConfig(
        level=getattr(logging, (level or settings.LOG_LEVEL).upper(), logging.INFO),
        format=settings.LOG_FORMAT
    )

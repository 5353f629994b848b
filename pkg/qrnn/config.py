"""Application configuration."""
import os


class Config:
    """Base configuration."""

    # Output
    OUTPUT_DIR = os.environ.get('QRNN_OUTPUT_DIR', 'results')

    # Logging
    LOG_LEVEL = os.environ.get('QRNN_LOG_LEVEL', 'INFO')
    LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

    # Seeding
    MASTER_SEED = int(os.environ.get('QRNN_MASTER_SEED', 20201))
    N_SEEDS = int(os.environ.get('QRNN_N_SEEDS', 10))

    # Architecture (n = 6 register, D = 3 layers)
    N_A = 3
    N_B = 3
    DEPTH = 3

    # Evaluation window: first 25 prediction points
    TEST_WINDOW = int(os.environ.get('QRNN_TEST_WINDOW', 25))

    # BFGS
    MAX_ITERATIONS = int(os.environ.get('QRNN_MAX_ITERATIONS', 500))
    GRAD_NORM_TOL = 1e-6
    WOLFE_C1 = 1e-4
    WOLFE_C2 = 0.9
    MAX_LINE_SEARCH_STEPS = 25

    # Spot-check density matrices every N accepted iterations (0 disables)
    INVARIANT_CHECK_INTERVAL = 10

    # Density-matrix invariant checks at every construction
    CHECK_INVARIANTS = os.environ.get('QRNN_CHECK_INVARIANTS', 'true').lower() == 'true'

    # Lindblad integrator
    LINDBLAD_SUBSTEPS = int(os.environ.get('QRNN_LINDBLAD_SUBSTEPS', 20))
    SPIN_INITIAL_STATE = '000'

    # Tau sweep ("from 0 to 10"; grid points are ours)
    TAU_GRID = (0.0, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0)

    # Parallel sweep cells
    WORKERS = int(os.environ.get('QRNN_WORKERS', 1))

    # Task defaults: (total_len, train_len, tau)
    TASKS = {
        'cosine': (200, 100, 0.2),
        'triangle': (200, 100, 0.2),
        'spin': (500, 200, 0.18),
    }


class DevelopmentConfig(Config):
    """Development configuration."""

    LOG_LEVEL = os.environ.get('QRNN_LOG_LEVEL', 'DEBUG')


class ProductionConfig(Config):
    """Production configuration for long sweeps."""

    # Hot path: skip eigenvalue checks at every construction
    CHECK_INVARIANTS = os.environ.get('QRNN_CHECK_INVARIANTS', 'false').lower() == 'true'


class TestingConfig(Config):
    """Testing configuration."""

    TESTING = True
    OUTPUT_DIR = 'test_results'
    N_SEEDS = 2
    MAX_ITERATIONS = 20
    CHECK_INVARIANTS = True
    WORKERS = 1


config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}

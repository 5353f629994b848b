"""Experiment configuration and sweep result rows."""
from dataclasses import dataclass, field, fields, replace
from typing import Optional

from qrnn.exceptions import ConfigError
from qrnn.models.training import TrainConfig
from qrnn.utils.validators import validate_product_label, validate_u64

TRAIN_KEYS = (
    'max_iterations',
    'grad_norm_tol',
    'wolfe_c1',
    'wolfe_c2',
    'max_line_search_steps',
    'invariant_check_interval',
)


def _parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ('true', '1', 'yes'):
        return True
    if value in ('false', '0', 'no'):
        return False
    raise ValueError(f'not a boolean: {text!r}')


def _parse_float_list(text: str) -> tuple:
    return tuple(float(item) for item in text.replace(';', ',').split(',') if item.strip())


KEY_PARSERS = {
    'task': str,
    'n_A': int,
    'n_B': int,
    'depth': int,
    'tau': float,
    'n_seeds': int,
    'master_seed': int,
    'test_window': int,
    'output_dir': str,
    'max_iterations': int,
    'grad_norm_tol': float,
    'wolfe_c1': float,
    'wolfe_c2': float,
    'max_line_search_steps': int,
    'invariant_check_interval': int,
    'tau_grid': _parse_float_list,
    'total_len': int,
    'train_len': int,
    'lindblad_substeps': int,
    'spin_initial_state': str,
    'workers': int,
    'check_invariants': _parse_bool,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one demo, sweep or gradient check needs."""

    task: str
    n_A: int
    n_B: int
    depth: int
    tau: float
    n_seeds: int
    master_seed: int
    test_window: int
    output_dir: str
    train: TrainConfig = field(default_factory=TrainConfig)
    tau_grid: tuple = ()
    total_len: int = 200
    train_len: int = 100
    lindblad_substeps: int = 20
    spin_initial_state: str = '000'
    workers: int = 1
    check_invariants: bool = True

    def __post_init__(self):
        if self.n_seeds < 1:
            raise ConfigError(f'n_seeds must be at least 1, got {self.n_seeds}')
        if self.test_window < 1:
            raise ConfigError(f'test_window must be at least 1, got {self.test_window}')
        if not validate_u64(self.master_seed):
            raise ConfigError(f'master_seed must be an unsigned 64-bit integer, got {self.master_seed}')
        if not 2 <= self.train_len < self.total_len:
            raise ConfigError(f'Need 2 <= train_len < total_len, got {self.train_len}/{self.total_len}')
        if self.test_window > self.total_len - self.train_len:
            raise ConfigError(
                f'test_window {self.test_window} exceeds the {self.total_len - self.train_len} test points'
            )
        if self.lindblad_substeps < 1:
            raise ConfigError('lindblad_substeps must be at least 1')
        if self.workers < 1:
            raise ConfigError('workers must be at least 1')
        if self.tau < 0 or any(t < 0 for t in self.tau_grid):
            raise ConfigError('Evolution times must be non-negative')
        if not validate_product_label(self.spin_initial_state):
            raise ConfigError(f'Invalid spin_initial_state {self.spin_initial_state!r}')

    def __repr__(self):
        return f'<ExperimentConfig {self.task} tau={self.tau} seeds={self.n_seeds}>'

    @classmethod
    def from_settings(cls, settings, task: str = 'cosine', **overrides) -> 'ExperimentConfig':
        """Defaults from a Config class, task defaults, then overrides."""
        return cls.from_mapping(settings, {'task': task, **overrides}, parsed=True)

    @classmethod
    def from_mapping(cls, settings, mapping: dict, parsed: bool = False) -> 'ExperimentConfig':
        """
        Build from `key -> value` pairs (strings unless parsed=True).

        Unknown keys and malformed values raise ConfigError.
        """
        values = {}
        for key, raw in mapping.items():
            if key not in KEY_PARSERS:
                raise ConfigError(f'Unknown config key: {key}')
            if parsed or not isinstance(raw, str):
                values[key] = raw
                continue
            try:
                values[key] = KEY_PARSERS[key](raw.strip())
            except ValueError as e:
                raise ConfigError(f'Bad value for {key}: {e}')

        task = values.pop('task', 'cosine')
        if task not in settings.TASKS:
            raise ConfigError(f'Unknown task {task!r}; choose from {sorted(settings.TASKS)}')
        total_len, train_len, tau = settings.TASKS[task]

        train_config = TrainConfig.from_settings(settings)
        train_values = {key: values.pop(key) for key in TRAIN_KEYS if key in values}
        if train_values:
            train_config = replace(train_config, **train_values)

        defaults = {
            'n_A': settings.N_A,
            'n_B': settings.N_B,
            'depth': settings.DEPTH,
            'tau': tau,
            'n_seeds': settings.N_SEEDS,
            'master_seed': settings.MASTER_SEED,
            'test_window': settings.TEST_WINDOW,
            'output_dir': settings.OUTPUT_DIR,
            'tau_grid': tuple(settings.TAU_GRID),
            'total_len': total_len,
            'train_len': train_len,
            'lindblad_substeps': settings.LINDBLAD_SUBSTEPS,
            'spin_initial_state': settings.SPIN_INITIAL_STATE,
            'workers': settings.WORKERS,
            'check_invariants': settings.CHECK_INVARIANTS,
        }
        defaults.update(values)
        return cls(task=task, train=train_config, **defaults)

    def with_overrides(self, output_dir: Optional[str] = None,
                       master_seed: Optional[int] = None) -> 'ExperimentConfig':
        changes = {}
        if output_dir is not None:
            changes['output_dir'] = output_dir
        if master_seed is not None:
            changes['master_seed'] = master_seed
        return replace(self, **changes) if changes else self

    def to_dict(self) -> dict:
        data = {f.name: getattr(self, f.name) for f in fields(self) if f.name != 'train'}
        data['tau_grid'] = ','.join(repr(float(t)) for t in self.tau_grid)
        for key in TRAIN_KEYS:
            data[key] = getattr(self.train, key)
        return data


@dataclass(frozen=True)
class SweepResultRow:
    """One (tau, seed) cell of the evolution-time sweep."""

    tau: float
    seed_index: int
    test_mse: Optional[float]
    status: str = 'ok'

    def __post_init__(self):
        if self.test_mse is not None and self.test_mse < 0:
            raise ValueError(f'MSE cannot be negative, got {self.test_mse}')

    def to_dict(self) -> dict:
        return {
            'tau': self.tau,
            'seed': self.seed_index,
            'mse': self.test_mse,
            'status': self.status,
        }

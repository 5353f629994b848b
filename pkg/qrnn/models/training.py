"""Optimizer configuration and results."""
from dataclasses import dataclass, field

import numpy as np

from qrnn.exceptions import ConfigError


@dataclass(frozen=True)
class TrainConfig:
    """BFGS settings."""

    max_iterations: int = 500
    grad_norm_tol: float = 1e-6
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    max_line_search_steps: int = 25
    invariant_check_interval: int = 0

    def __post_init__(self):
        if not 0 < self.wolfe_c1 < self.wolfe_c2 < 1:
            raise ConfigError(
                f'Wolfe constants need 0 < c1 < c2 < 1, got c1={self.wolfe_c1}, c2={self.wolfe_c2}'
            )
        if self.grad_norm_tol <= 0:
            raise ConfigError(f'grad_norm_tol must be positive, got {self.grad_norm_tol}')
        if self.max_iterations < 0 or self.max_line_search_steps < 1:
            raise ConfigError('Iteration limits must be positive')
        if self.invariant_check_interval < 0:
            raise ConfigError('invariant_check_interval must be non-negative')

    @classmethod
    def from_settings(cls, settings) -> 'TrainConfig':
        return cls(
            max_iterations=settings.MAX_ITERATIONS,
            grad_norm_tol=settings.GRAD_NORM_TOL,
            wolfe_c1=settings.WOLFE_C1,
            wolfe_c2=settings.WOLFE_C2,
            max_line_search_steps=settings.MAX_LINE_SEARCH_STEPS,
            invariant_check_interval=settings.INVARIANT_CHECK_INTERVAL,
        )


@dataclass
class TrainResult:
    """
    Outcome of a minimization.

    cost_trace holds the starting cost followed by one entry per accepted
    iteration.
    """

    final_params: object
    cost_trace: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    final_grad_norm: float = float('nan')
    message: str = ''

    def __repr__(self):
        return (
            f'<TrainResult iterations={self.iterations} converged={self.converged} '
            f'cost={self.final_cost:.6g}>'
        )

    @property
    def final_cost(self) -> float:
        return self.cost_trace[-1] if self.cost_trace else float('nan')

    def to_dict(self) -> dict:
        return {
            'iterations': self.iterations,
            'converged': self.converged,
            'final_cost': self.final_cost,
            'final_grad_norm': self.final_grad_norm,
            'message': self.message,
        }

    def final_vector(self) -> np.ndarray:
        values = getattr(self.final_params, 'values', self.final_params)
        return np.asarray(values, dtype=float)

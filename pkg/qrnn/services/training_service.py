"""Cost functions, BFGS with a strong-Wolfe line search, and the QRNN training driver."""
import logging
import math
from typing import Callable, Optional

import numpy as np

from qrnn.exceptions import DimensionMismatchError, NonFiniteOracleError
from qrnn.models import QrnnArchitecture, QrnnParameters, TimeSeries, TrainConfig, TrainResult
from qrnn.services.gradient_service import (
    grad_finite_difference,
    grad_forward_sensitivity,
    grad_parameter_shift,
)
from qrnn.services.qrnn_service import run_teacher_forced, verify_trajectory

logger = logging.getLogger(__name__)

CURVATURE_TOL = 1e-10
GRADIENT_METHODS = ('sensitivity', 'shift', 'finite-difference')


def cost_half_sse(outputs, targets) -> float:
    """1/2 sum (y_bar - target)^2."""
    outputs, targets = list(outputs), list(targets)
    if len(outputs) != len(targets):
        raise DimensionMismatchError(f'{len(outputs)} outputs vs {len(targets)} targets')
    return 0.5 * math.fsum((y - target) ** 2 for y, target in zip(outputs, targets))


def mse(outputs, targets) -> float:
    """Mean squared residual."""
    outputs, targets = list(outputs), list(targets)
    if len(outputs) != len(targets):
        raise DimensionMismatchError(f'{len(outputs)} outputs vs {len(targets)} targets')
    if not outputs:
        raise ValueError('Mean squared error of an empty sequence')
    return math.fsum((y - target) ** 2 for y, target in zip(outputs, targets)) / len(outputs)


def sequence_cost(arch: QrnnArchitecture, params: QrnnParameters, inputs, targets) -> float:
    """Teacher-forced training cost; y_bar_t is scored against targets[t]."""
    targets = list(targets)
    outputs = run_teacher_forced(arch, params, list(inputs)[:len(targets)])
    return cost_half_sse(outputs, targets)


def _finite_cost(cost_oracle: Callable, x: np.ndarray) -> float:
    value = float(cost_oracle(x))
    if not math.isfinite(value):
        raise NonFiniteOracleError(f'Cost oracle returned {value}', point=x.copy())
    return value


def _finite_gradient(gradient_oracle: Callable, x: np.ndarray) -> np.ndarray:
    gradient = gradient_oracle(x)
    value = np.array(getattr(gradient, 'entries', gradient), dtype=float).ravel()
    if value.shape != x.shape:
        raise DimensionMismatchError(f'Gradient shape {value.shape} does not match point {x.shape}')
    if not np.all(np.isfinite(value)):
        raise NonFiniteOracleError('Gradient oracle returned non-finite entries', point=x.copy())
    return value


class StrongWolfeLineSearch:
    """
    Line search satisfying the strong Wolfe conditions

        phi(a) <= phi(0) + c1 a phi'(0)
        |phi'(a)| <= c2 |phi'(0)|

    Bracketing by step doubling, then zoom with safeguarded quadratic
    interpolation.
    """

    def __init__(self, cost_oracle: Callable, gradient_oracle: Callable,
                 c1: float = 1e-4, c2: float = 0.9, max_steps: int = 25):
        self.cost_oracle = cost_oracle
        self.gradient_oracle = gradient_oracle
        self.c1 = c1
        self.c2 = c2
        self.max_steps = max_steps

    def search(self, x: np.ndarray, f0: float, g0: np.ndarray, direction: np.ndarray,
               initial_step: float = 1.0) -> Optional[tuple]:
        """
        Returns (step, x_new, f_new, g_new), or None when no acceptable step
        was found within max_steps trials.
        """
        slope0 = float(g0 @ direction)
        if slope0 >= 0:
            return None

        context = (x, f0, slope0, direction)
        step_prev, f_prev, slope_prev = 0.0, f0, slope0
        step = initial_step

        for i in range(self.max_steps):
            x_new = x + step * direction
            f_new = _finite_cost(self.cost_oracle, x_new)

            if f_new > f0 + self.c1 * step * slope0 or (i > 0 and f_new >= f_prev):
                return self._zoom(context, step_prev, step, f_prev, f_new, slope_prev)

            g_new = _finite_gradient(self.gradient_oracle, x_new)
            slope = float(g_new @ direction)
            if abs(slope) <= -self.c2 * slope0:
                return step, x_new, f_new, g_new
            if slope >= 0:
                return self._zoom(context, step, step_prev, f_new, f_prev, slope)

            step_prev, f_prev, slope_prev = step, f_new, slope
            step *= 2.0

        return None

    def _zoom(self, context, lo, hi, f_lo, f_hi, slope_lo) -> Optional[tuple]:
        x, f0, slope0, direction = context

        for _ in range(self.max_steps):
            step = self._interpolate(lo, hi, f_lo, f_hi, slope_lo)
            x_new = x + step * direction
            f_new = _finite_cost(self.cost_oracle, x_new)

            if f_new > f0 + self.c1 * step * slope0 or f_new >= f_lo:
                hi, f_hi = step, f_new
                continue

            g_new = _finite_gradient(self.gradient_oracle, x_new)
            slope = float(g_new @ direction)
            if abs(slope) <= -self.c2 * slope0:
                return step, x_new, f_new, g_new
            if slope * (hi - lo) >= 0:
                hi, f_hi = lo, f_lo
            lo, f_lo, slope_lo = step, f_new, slope

        return None

    @staticmethod
    def _interpolate(lo, hi, f_lo, f_hi, slope_lo) -> float:
        """Minimizer of the quadratic through (lo, f_lo, slope_lo) and (hi, f_hi); bisect if unsafe."""
        width = hi - lo
        midpoint = lo + 0.5 * width
        if width == 0:
            return lo

        curvature = (f_hi - f_lo - slope_lo * width) / (width * width)
        if not curvature > 0:
            return midpoint

        step = lo - slope_lo / (2.0 * curvature)
        low, high = min(lo, hi), max(lo, hi)
        margin = 0.1 * abs(width)
        if not low + margin <= step <= high - margin:
            return midpoint
        return step


def bfgs_minimize(cost_oracle: Callable, gradient_oracle: Callable, x0, config: TrainConfig,
                  callback: Optional[Callable] = None) -> TrainResult:
    """
    BFGS on the inverse Hessian with a strong-Wolfe line search.

    The inverse Hessian is updated only when s^T y > 1e-10 and is scaled by
    s^T y / y^T y before its first update. A failed line search resets it to
    the identity once; a second failure in a row stops the run.

    callback(iteration, x, cost) runs after every accepted iteration.
    """
    x = np.array(x0, dtype=float).ravel()
    f = _finite_cost(cost_oracle, x)
    g = _finite_gradient(gradient_oracle, x)

    dim = x.size
    identity = np.eye(dim)
    inverse_hessian = identity.copy()
    fresh = True
    f_old = f + 0.5 * np.linalg.norm(g)

    line_search = StrongWolfeLineSearch(
        cost_oracle, gradient_oracle,
        c1=config.wolfe_c1, c2=config.wolfe_c2, max_steps=config.max_line_search_steps
    )

    cost_trace = [f]
    iterations = 0
    converged = False
    message = ''

    while True:
        grad_norm = float(np.linalg.norm(g))
        if grad_norm < config.grad_norm_tol:
            converged = True
            message = 'gradient norm below tolerance'
            break
        if iterations >= config.max_iterations:
            message = 'maximum iterations reached'
            break

        direction = -inverse_hessian @ g
        slope = float(g @ direction)
        if not slope < 0:
            inverse_hessian, fresh = identity.copy(), True
            direction, slope = -g, -grad_norm ** 2

        initial_step = 1.01 * 2.0 * (f - f_old) / slope
        if not math.isfinite(initial_step) or initial_step <= 0:
            initial_step = 1.0
        initial_step = min(1.0, initial_step)

        found = line_search.search(x, f, g, direction, initial_step)
        if found is None:
            if fresh:
                message = 'line search failed'
                logger.warning(f'Line search failed at iteration {iterations}, cost {f:.6g}')
                break
            logger.debug(f'Line search failed at iteration {iterations}; resetting inverse Hessian')
            inverse_hessian, fresh = identity.copy(), True
            continue

        _, x_new, f_new, g_new = found
        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        if sy > CURVATURE_TOL:
            if fresh:
                inverse_hessian = (sy / float(y @ y)) * identity
                fresh = False
            rho = 1.0 / sy
            v = identity - rho * np.outer(s, y)
            inverse_hessian = v @ inverse_hessian @ v.T + rho * np.outer(s, s)
        else:
            logger.warning(f'Skipping inverse Hessian update (s^T y = {sy:.3e})')

        f_old, x, f, g = f, x_new, f_new, g_new
        iterations += 1
        cost_trace.append(f)

        if callback is not None:
            callback(iterations, x, f)

    return TrainResult(
        final_params=x,
        cost_trace=cost_trace,
        iterations=iterations,
        converged=converged,
        final_grad_norm=float(np.linalg.norm(g)),
        message=message
    )


class SequenceObjective:
    """
    Training cost and gradient of a QRNN on a fixed teacher-forced sequence.

    The most recent evaluation is cached so BFGS can ask for cost and
    gradient at the same point without recomputation.
    """

    def __init__(self, arch: QrnnArchitecture, inputs, targets, gradient: str = 'sensitivity',
                 h: float = 1e-5):
        if gradient not in GRADIENT_METHODS:
            raise ValueError(f'Unknown gradient method {gradient!r}; choose from {GRADIENT_METHODS}')
        self.arch = arch
        self.inputs = [float(x) for x in inputs]
        self.targets = [float(x) for x in targets]
        self.gradient = gradient
        self.h = h
        self.evaluations = {'cost': 0, 'gradient': 0}
        self._cost_cache = (None, None)
        self._gradient_cache = (None, None)

    def params(self, vector) -> QrnnParameters:
        return QrnnParameters.from_vector(self.arch, vector)

    def cost(self, vector) -> float:
        key, value = self._cost_cache
        if key is not None and np.array_equal(key, vector):
            return value

        value = sequence_cost(self.arch, self.params(vector), self.inputs, self.targets)
        self.evaluations['cost'] += 1
        self._cost_cache = (np.array(vector, dtype=float), value)
        return value

    def grad(self, vector) -> np.ndarray:
        key, value = self._gradient_cache
        if key is not None and np.array_equal(key, vector):
            return value

        params = self.params(vector)
        if self.gradient == 'sensitivity':
            gradient = grad_forward_sensitivity(self.arch, params, self.inputs, self.targets)
        elif self.gradient == 'shift':
            gradient, _ = grad_parameter_shift(self.arch, params, self.inputs, self.targets)
        else:
            gradient = grad_finite_difference(self.arch, params, self.inputs, self.targets, h=self.h)

        value = gradient.entries
        self.evaluations['gradient'] += 1
        self._gradient_cache = (np.array(vector, dtype=float), value)
        return value


def train_qrnn(arch: QrnnArchitecture, series: TimeSeries, config: TrainConfig,
               gradient: str = 'sensitivity', initial_params: Optional[QrnnParameters] = None) -> TrainResult:
    """
    Minimize the teacher-forced cost over the training window.

    Starts from all angles 0 and c_out = 1 unless initial_params is given.
    Returns TrainResult with final_params as QrnnParameters.
    """
    inputs, targets = series.training_pairs()
    objective = SequenceObjective(arch, inputs, targets, gradient=gradient)
    start = initial_params if initial_params is not None else QrnnParameters.initial(arch)

    def spot_check(iteration, vector, cost):
        logger.debug(f'Iteration {iteration}: cost {cost:.10g}')
        interval = config.invariant_check_interval
        if interval and iteration % interval == 0:
            verify_trajectory(arch, objective.params(vector), objective.inputs)

    result = bfgs_minimize(objective.cost, objective.grad, start.values, config, callback=spot_check)
    result.final_params = objective.params(result.final_params)

    logger.info(
        f'Training {series.name} finished: {result.iterations} iterations, '
        f'cost {result.cost_trace[0]:.6g} -> {result.final_cost:.6g} ({result.message})'
    )
    return result

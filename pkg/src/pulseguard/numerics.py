"""Fixed-step integration kernels shared by every solver in the package.

Everything here is deliberately plain: uniform grids, classical RK4, composite
trapezoid sums, and a predictor-corrector scheme for Volterra integro-
differential equations.  Fixed steps keep runs bit-reproducible, which the
rest of the package relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "NumericOverflowError",
    "TimeGrid",
    "rk4_step",
    "trapezoid_integral",
    "running_trapezoid",
    "volterra_solve",
]


class NumericOverflowError(RuntimeError):
    """Raised when an integration produces non-finite or runaway values."""


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid on [0, t_max] with n_steps cells.

    Nodes live at k*dt for k = 0..n_steps; midpoints at (k + 1/2)*dt.
    Piecewise-constant signals are sampled at the midpoints so that a pulse
    edge falling exactly on a node never produces an ambiguous sample.
    """

    t_max: float
    n_steps: int

    def __post_init__(self) -> None:
        if not (self.t_max > 0.0 and np.isfinite(self.t_max)):
            raise ValueError(f"t_max must be positive and finite, got {self.t_max}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")

    @property
    def dt(self) -> float:
        return self.t_max / self.n_steps

    @property
    def times(self) -> np.ndarray:
        """Grid nodes, length n_steps + 1."""
        return np.arange(self.n_steps + 1) * self.dt

    @property
    def midpoints(self) -> np.ndarray:
        """Cell midpoints, length n_steps."""
        return (np.arange(self.n_steps) + 0.5) * self.dt


def rk4_step(derivative: Callable, t: float, y, dt: float):
    """One classical Runge-Kutta step for dy/dt = derivative(t, y).

    y may be a scalar or an ndarray; the result has the same shape.  A
    non-finite result means the integration is diverging and is reported as
    NumericOverflowError rather than silently propagated.
    """
    k1 = derivative(t, y)
    k2 = derivative(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = derivative(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = derivative(t + dt, y + dt * k3)
    out = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise NumericOverflowError(f"non-finite value in RK4 step at t = {t!r}")
    return out


def trapezoid_integral(values: np.ndarray, dt: float) -> complex:
    """Composite trapezoid integral of uniformly sampled values.

    A single sample spans no interval, so it integrates to zero.
    """
    values = np.asarray(values)
    if values.ndim == 0 or values.shape[-1] < 2:
        return values.dtype.type(0.0)
    return np.trapezoid(values, dx=dt, axis=-1)

def running_trapezoid(values: np.ndarray, dt: float) -> np.ndarray:
    """Cumulative trapezoid integral along the last axis; output[..., 0] = 0."""
    values = np.asarray(values)
    out = np.zeros_like(values, dtype=np.result_type(values.dtype, float))
    np.cumsum(0.5 * dt * (values[..., 1:] + values[..., :-1]), axis=-1, out=out[..., 1:])
    return out


def volterra_solve(
    local_rate: Optional[Callable[[float], complex]],
    kernel: Callable[[float, np.ndarray], np.ndarray],
    grid: TimeGrid,
    y0: complex,
    overflow_limit: float = 1.0e6,
) -> np.ndarray:
    """Solve dy/dt = a(t) y - int_0^t g(t, s) y(s) ds on the grid.

    local_rate is a(t) (None means zero); kernel(t, s_array) must return
    g(t, s) for a vector of history points s <= t.  The memory integral is a
    composite trapezoid over the solution history and each step is a Heun
    predictor-corrector, so the scheme is globally second order.  Cost is
    O(n^2) in the number of steps; with a kernel vectorised over s the
    constant is small.

    Raises NumericOverflowError as soon as |y| exceeds overflow_limit,
    reporting the time at which the solution ran away.
    """
    n = grid.n_steps
    dt = grid.dt
    times = grid.times
    y = np.empty(n + 1, dtype=complex)
    y[0] = y0

    def a(t: float) -> complex:
        return 0.0 if local_rate is None else local_rate(t)

    # trapezoid weights are built once and sliced; w[0] stays 1/2 throughout
    for i in range(n):
        t_i = times[i]
        t_next = times[i + 1]
        if i == 0:
            mem_i = 0.0
        else:
            integrand = kernel(t_i, times[: i + 1]) * y[: i + 1]
            mem_i = dt * (np.sum(integrand) - 0.5 * (integrand[0] + integrand[i]))
        f_i = a(t_i) * y[i] - mem_i

        y_pred = y[i] + dt * f_i
        row = kernel(t_next, times[: i + 2])
        integrand = row[: i + 1] * y[: i + 1]
        # history part keeps full weight on the last known point; the new
        # endpoint enters with the predictor value and trapezoid weight 1/2
        mem_next = dt * (
            np.sum(integrand) - 0.5 * integrand[0] + 0.5 * row[i + 1] * y_pred
        )
        f_next = a(t_next) * y_pred - mem_next
        y[i + 1] = y[i] + 0.5 * dt * (f_i + f_next)

        if not np.isfinite(y[i + 1]) or abs(y[i + 1]) > overflow_limit:
            raise NumericOverflowError(
                f"Volterra solution exceeded {overflow_limit:g} at t = {t_next:.6g}"
            )
    return y

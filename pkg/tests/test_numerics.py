"""Integration kernels: grids, RK4, trapezoid sums, Volterra solver.

The Volterra scheme is checked against closed-form solutions of the
equivalent second-order ODEs (a memory kernel g constant in s turns the
integro-differential equation into y'' = a y' - y), which exercises the
history quadrature and the predictor-corrector independently of any
physics module.
"""

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from pulseguard.numerics import (
    NumericOverflowError,
    TimeGrid,
    rk4_step,
    running_trapezoid,
    trapezoid_integral,
    volterra_solve,
)


class TestTimeGrid:
    def test_basic_layout(self):
        grid = TimeGrid(t_max=2.0, n_steps=4)
        assert grid.dt == 0.5
        assert grid.times.shape == (5,)
        assert grid.midpoints.shape == (4,)
        np.testing.assert_allclose(grid.times, [0.0, 0.5, 1.0, 1.5, 2.0])
        np.testing.assert_allclose(grid.midpoints, [0.25, 0.75, 1.25, 1.75])

    def test_endpoints(self):
        grid = TimeGrid(t_max=7.3, n_steps=997)
        assert grid.times[0] == 0.0
        assert grid.times[-1] == pytest.approx(7.3, abs=1e-12)

    @pytest.mark.parametrize("t_max", [0.0, -1.0, np.inf, np.nan])
    def test_bad_t_max(self, t_max):
        with pytest.raises(ValueError):
            TimeGrid(t_max=t_max, n_steps=10)

    def test_bad_n_steps(self):
        with pytest.raises(ValueError):
            TimeGrid(t_max=1.0, n_steps=0)

    @given(
        t_max=st.floats(min_value=1e-3, max_value=1e3),
        n_steps=st.integers(min_value=1, max_value=2000),
    )
    def test_midpoints_bisect_cells(self, t_max, n_steps):
        grid = TimeGrid(t_max=t_max, n_steps=n_steps)
        times = grid.times
        mids = grid.midpoints
        assert np.all(mids > times[:-1])
        assert np.all(mids < times[1:])


class TestRk4:
    def test_exponential_decay(self):
        y, dt = 1.0, 0.01
        for k in range(100):
            y = rk4_step(lambda t, v: -v, k * dt, y, dt)
        assert abs(y - np.exp(-1.0)) < 1e-9

    def test_fourth_order_convergence(self):
        errs = []
        for n in (50, 100):
            y, dt = 1.0, 1.0 / n
            for k in range(n):
                y = rk4_step(lambda t, v: -v, k * dt, y, dt)
            errs.append(abs(y - np.exp(-1.0)))
        assert 12.0 < errs[0] / errs[1] < 20.0

    def test_vector_state_rotation(self):
        # y'' = -y as a 2-vector; one period returns to the start
        def deriv(t, y):
            return np.array([y[1], -y[0]])

        y = np.array([1.0, 0.0])
        n = 2000
        dt = 2.0 * np.pi / n
        for k in range(n):
            y = rk4_step(deriv, k * dt, y, dt)
        np.testing.assert_allclose(y, [1.0, 0.0], atol=1e-10)

    def test_non_finite_raises(self):
        with pytest.raises(NumericOverflowError):
            rk4_step(lambda t, y: np.inf, 0.0, 1.0, 0.1)


class TestTrapezoid:
    def test_linear_exact(self):
        t = np.linspace(0.0, 3.0, 31)
        values = 2.0 * t + 1.0
        assert trapezoid_integral(values, t[1] - t[0]) == pytest.approx(12.0, rel=1e-14)

    def test_single_sample_is_zero(self):
        assert trapezoid_integral(np.array([4.2]), 0.1) == 0.0

    def test_complex_values(self):
        values = np.exp(1j * np.linspace(0.0, 1.0, 101))
        out = trapezoid_integral(values, 0.01)
        assert isinstance(complex(out), complex)
        assert out.imag == pytest.approx(1.0 - np.cos(1.0), abs=1e-4)

    @given(
        hnp.arrays(
            np.float64,
            st.integers(min_value=2, max_value=64),
            elements=st.floats(min_value=-1e3, max_value=1e3),
        )
    )
    def test_matches_numpy(self, values):
        assert trapezoid_integral(values, 0.37) == pytest.approx(
            np.trapezoid(values, dx=0.37), rel=1e-12, abs=1e-12
        )

    def test_running_starts_at_zero(self):
        out = running_trapezoid(np.array([1.0, 2.0, 3.0]), 0.5)
        assert out[0] == 0.0

    def test_running_linear_exact(self):
        t = np.linspace(0.0, 2.0, 41)
        out = running_trapezoid(t, t[1] - t[0])
        np.testing.assert_allclose(out, t**2 / 2.0, atol=1e-14)

    @given(
        hnp.arrays(
            np.float64,
            st.integers(min_value=2, max_value=64),
            elements=st.floats(min_value=-1e3, max_value=1e3),
        )
    )
    def test_running_final_matches_total(self, values):
        out = running_trapezoid(values, 0.11)
        assert out[-1] == pytest.approx(trapezoid_integral(values, 0.11), rel=1e-12, abs=1e-12)

    def test_running_complex_dtype(self):
        out = running_trapezoid(np.array([1j, 2j, 3j]), 1.0)
        assert np.iscomplexobj(out)
        assert out[-1] == pytest.approx(4j)


class TestVolterra:
    def test_zero_kernel_matches_heun_bitwise(self):
        """With no memory the scheme must collapse to plain Heun."""
        grid = TimeGrid(t_max=2.0, n_steps=200)

        def rate(t):
            return -0.7 + 0.2j

        zero = lambda t, s: np.zeros_like(s)
        y = volterra_solve(rate, zero, grid, 1.0 + 0j)

        ref = np.empty(grid.n_steps + 1, dtype=complex)
        ref[0] = 1.0
        dt = grid.dt
        for i in range(grid.n_steps):
            f_i = rate(grid.times[i]) * ref[i]
            y_pred = ref[i] + dt * f_i
            f_next = rate(grid.times[i + 1]) * y_pred
            ref[i + 1] = ref[i] + 0.5 * dt * (f_i + f_next)
        np.testing.assert_array_equal(y, ref)

    def test_cosine_oracle(self):
        """g = 1 turns the equation into y'' = -y, so y(t) = cos t."""
        grid = TimeGrid(t_max=2.0 * np.pi, n_steps=2000)
        y = volterra_solve(None, lambda t, s: np.ones_like(s), grid, 1.0 + 0j)
        assert np.max(np.abs(y.real - np.cos(grid.times))) < 1e-5
        assert np.max(np.abs(y.imag)) < 1e-12

    def test_second_order_convergence(self):
        errs = []
        for n in (500, 1000):
            grid = TimeGrid(t_max=2.0 * np.pi, n_steps=n)
            y = volterra_solve(None, lambda t, s: np.ones_like(s), grid, 1.0 + 0j)
            errs.append(np.max(np.abs(y.real - np.cos(grid.times))))
        assert 3.4 < errs[0] / errs[1] < 4.6

    def test_damped_oscillator(self):
        """Constant local rate a plus g = 1 gives y'' - a y' + y = 0."""
        a = -0.1
        grid = TimeGrid(t_max=10.0, n_steps=2000)
        y = volterra_solve(lambda t: a, lambda t, s: np.ones_like(s), grid, 1.0 + 0j)
        wt = np.sqrt(1.0 - 0.0025)
        t = grid.times
        ref = np.exp(-0.05 * t) * (np.cos(wt * t) - (0.05 / wt) * np.sin(wt * t))
        assert np.max(np.abs(y.real - ref)) < 3e-5

    def test_overflow_reports_time(self):
        # g = -1 gives y'' = +y, growing like cosh until the limit trips
        grid = TimeGrid(t_max=20.0, n_steps=2000)
        with pytest.raises(NumericOverflowError, match="exceeded"):
            volterra_solve(
                None, lambda t, s: -np.ones_like(s), grid, 1.0 + 0j, overflow_limit=10.0
            )

"""Finite-time sweep of a two-level crossing, reduced to one amplitude.

The Hamiltonian is H(t) = (omega + c(t)) [ (t/T) sig_x + (1 - t/T) sig_z ]:
a linear interpolation from sig_z to sig_x whose overall scale carries the
control.  In the frame of the instantaneous eigenvectors the amplitude
psi_0 on the (ground) target eigenstate obeys an exact one-dimensional
integro-differential equation

    d/dt psi_0(t) = - int_0^t g(t, s) psi_0(s) ds,

with the propagator

    g(t, s) = -<E0(t)|dE1(t)> <E1(s)|dE0(s)> exp[ int_s^t (i E - <E1|dE1>) ],

E = E0 - E1 the signed gap.  In the real gauge the Berry terms vanish and
the geometric couplings reduce to half the mixing-angle velocity,
thetadot = (1/T) / (2 s^2 - 2 s + 1) with s = t/T.  A two-component
Schroedinger integration in the same frame serves as the independent
oracle.  |int_0^t g(t,s) psi_0(s) ds| is the adiabaticity defect: the sweep
is adiabatic exactly where it stays small, and a fast control c(t) shrinks
it by speeding up the oscillatory exponent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .numerics import NumericOverflowError, TimeGrid, rk4_step, volterra_solve
from .signals import SampledSignal, SignalFamily, substream

__all__ = [
    "SweepSpec",
    "EigenFrame",
    "PhaseTable",
    "Psi0Curve",
    "PassageEnsemble",
    "eigensystem",
    "build_eigen_frame",
    "geometric_couplings",
    "finite_difference_couplings",
    "dynamical_phases",
    "propagator_g",
    "solve_psi0",
    "tdse_oracle",
    "tdse_components",
    "adiabatic_defect",
    "passage_kernel",
    "ensemble_passage",
]

# the control may not close the gap or flip the sweep's sign
_CLAMP_FRACTION = -0.9
_ABS_TOLERANCE = 1.0e-3  # admissible |psi_0| overshoot from discretization


@dataclass(frozen=True)
class SweepSpec:
    """Linear sweep schedule a(s) = s, b(s) = 1 - s over passage time T.

    At t = 0 the Hamiltonian is base_freq * sig_z, at t = T it is
    base_freq * sig_x; the minimum gap 2^(1/2) * base_freq occurs midway.
    """

    passage_time: float
    base_freq: float = 1.0

    def __post_init__(self) -> None:
        if not (self.passage_time > 0.0 and np.isfinite(self.passage_time)):
            raise ValueError(f"passage_time must be positive, got {self.passage_time}")
        if not (self.base_freq > 0.0):
            raise ValueError(f"base_freq must be positive, got {self.base_freq}")

    def mixing_angle(self, t):
        """theta(t) = atan2(s, 1 - s), the rotation angle of the eigenbasis."""
        s = np.asarray(t, dtype=float) / self.passage_time
        return np.arctan2(s, 1.0 - s)

    def angle_velocity(self, t):
        """thetadot(t) = (1/T) / (2 s^2 - 2 s + 1); peaks at 2/T midway."""
        s = np.asarray(t, dtype=float) / self.passage_time
        return (1.0 / self.passage_time) / (2.0 * s * s - 2.0 * s + 1.0)

    def radial(self, t):
        """|a, b|(t): the gap is 2 (omega + c) radial(t)."""
        s = np.asarray(t, dtype=float) / self.passage_time
        return np.sqrt(2.0 * s * s - 2.0 * s + 1.0)


def _clamped_control(sweep: SweepSpec, control: Optional[SampledSignal], grid: TimeGrid):
    """Per-cell prefactor kappa = omega + c, with c clamped above -0.9 omega."""
    if control is None:
        return np.full(grid.n_steps, sweep.base_freq)
    if control.grid != grid:
        raise ValueError("control signal was sampled on a different grid")
    c = np.maximum(control.values, _CLAMP_FRACTION * sweep.base_freq)
    return sweep.base_freq + c


@dataclass(frozen=True)
class EigenFrame:
    """Instantaneous eigensystem on the grid nodes, in a continuous real gauge.

    energies[:, n] is E_n with E_0 <= E_1; gap = E_0 - E_1 (signed, negative
    throughout); vectors[k, :, n] is |E_n(t_k)>.  Eigenvectors do not depend
    on the control because c(t) multiplies the whole Hamiltonian.
    """

    sweep: SweepSpec
    grid: TimeGrid
    energies: np.ndarray
    gap: np.ndarray
    mixing_angle: np.ndarray
    vectors: np.ndarray


def _gauge_fix(vectors: np.ndarray) -> np.ndarray:
    """Fix eigenvector signs: anchor the first frame, then keep consecutive
    overlaps positive along the grid."""
    fixed = vectors.copy()
    for n in range(fixed.shape[2]):
        anchor = fixed[0, :, n]
        if anchor[np.argmax(np.abs(anchor))] < 0.0:
            fixed[0, :, n] = -anchor
    overlaps = np.einsum("kin,kin->kn", fixed[:-1], fixed[1:])
    flips = np.cumprod(np.where(overlaps < 0.0, -1.0, 1.0), axis=0)
    fixed[1:] *= flips[:, None, :]
    return fixed


def build_eigen_frame(
    sweep: SweepSpec, control: Optional[SampledSignal], grid: TimeGrid
) -> EigenFrame:
    """Diagonalize H(t) at every node and fix the gauge.

    The node value of a piecewise-constant control is taken from the cell to
    its right (the final node reuses the last cell).
    """
    kappa_cells = _clamped_control(sweep, control, grid)
    kappa_nodes = np.append(kappa_cells, kappa_cells[-1])
    times = grid.times
    s = times / sweep.passage_time
    h = np.zeros((grid.n_steps + 1, 2, 2))
    h[:, 0, 0] = 1.0 - s
    h[:, 1, 1] = -(1.0 - s)
    h[:, 0, 1] = s
    h[:, 1, 0] = s
    h *= kappa_nodes[:, None, None]
    energies, vectors = np.linalg.eigh(h)
    gap = energies[:, 0] - energies[:, 1]
    if np.max(gap) > -1.0e-9:
        raise ValueError("eigenvalue gap closed; control must keep omega + c positive")
    return EigenFrame(
        sweep=sweep,
        grid=grid,
        energies=energies,
        gap=gap,
        mixing_angle=sweep.mixing_angle(times),
        vectors=_gauge_fix(vectors),
    )


def eigensystem(
    t: float, sweep: SweepSpec, control=None
) -> tuple[np.ndarray, np.ndarray]:
    """Single-point eigensystem: (energies [E0, E1], vectors [:, n] = |E_n>).

    control may be None, a plain number, or a SampledSignal (the value is
    read from the cell containing t).  Vectors follow the same real-gauge
    convention as build_eigen_frame's anchor (dominant component positive).
    """
    if control is None:
        c = 0.0
    elif isinstance(control, SampledSignal):
        idx = min(int(t / control.grid.dt), control.grid.n_steps - 1)
        c = float(control.values[idx])
    else:
        c = float(control)
    kappa = sweep.base_freq + max(c, _CLAMP_FRACTION * sweep.base_freq)
    if not kappa > 0.0:
        raise ValueError("omega + c must stay positive")
    s = t / sweep.passage_time
    h = kappa * np.array([[1.0 - s, s], [s, -(1.0 - s)]])
    energies, vectors = np.linalg.eigh(h)
    if abs(energies[1] - energies[0]) < 1.0e-9:
        raise ValueError(f"degenerate gap at t = {t!r}")
    for n in range(2):
        if vectors[np.argmax(np.abs(vectors[:, n])), n] < 0.0:
            vectors[:, n] = -vectors[:, n]
    return energies, vectors


def geometric_couplings(frame: EigenFrame) -> np.ndarray:
    """<E_m | dE_n> on the nodes, shape (n+1, 2, 2), from the analytic angle.

    In the real gauge the diagonal entries vanish and the off-diagonal pair
    is antisymmetric: <E0|dE1> = thetadot/2 = -<E1|dE0>.
    """
    half = 0.5 * frame.sweep.angle_velocity(frame.grid.times)
    out = np.zeros((frame.grid.n_steps + 1, 2, 2))
    out[:, 0, 1] = half
    out[:, 1, 0] = -half
    return out


def finite_difference_couplings(frame: EigenFrame) -> np.ndarray:
    """Centered-difference <E_m | dE_n>, second-order one-sided at the ends.

    Pure cross-check for the analytic form; never used by the solvers.
    """
    v = frame.vectors
    dt = frame.grid.dt
    dv = np.empty_like(v)
    dv[1:-1] = (v[2:] - v[:-2]) / (2.0 * dt)
    dv[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt)
    dv[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * dt)
    return np.einsum("kim,kin->kmn", v, dv)


@dataclass(frozen=True)
class PhaseTable:
    """Dynamical phases of the sweep at half-step resolution.

    fine[j] is Lambda(j * dt/2) where Lambda(t) = int_0^t (E0 - E1), built
    cell by cell with the exact per-cell control value (Simpson on the
    smooth radial factor), so impulsive controls integrate correctly.
    theta[:, n] = -int_0^t E_n at the nodes.
    """

    grid: TimeGrid
    fine: np.ndarray
    theta: np.ndarray

    @property
    def nodes(self) -> np.ndarray:
        return self.fine[::2]


def dynamical_phases(
    sweep: SweepSpec, control: Optional[SampledSignal], grid: TimeGrid
) -> PhaseTable:
    kappa = _clamped_control(sweep, control, grid)
    n = grid.n_steps
    dt = grid.dt
    quarter = np.arange(4 * n + 1) * (0.25 * dt)
    r = sweep.radial(quarter)
    # Simpson integrals of the radial factor over each half cell
    h = 0.5 * dt
    r0 = r[:-1:2]
    rm = r[1::2]
    r1 = r[2::2]
    half_areas = (h / 6.0) * (r0 + 4.0 * rm + r1)  # 2n half-cell areas
    increments = -2.0 * np.repeat(kappa, 2) * half_areas
    fine = np.concatenate([[0.0], np.cumsum(increments)])
    lam_nodes = fine[::2]
    # theta_n = -int E_n with E_0 = -kappa r, E_1 = +kappa r, Lambda = -2 int kappa r
    theta = np.stack([-lam_nodes / 2.0, lam_nodes / 2.0], axis=1)
    return PhaseTable(grid=grid, fine=fine, theta=theta)


def _phase_index(t, dt: float) -> np.ndarray:
    """Map half-step-aligned times onto indices of PhaseTable.fine."""
    idx = np.rint(np.asarray(t) / (0.5 * dt)).astype(int)
    return idx


def propagator_g(t: float, s, frame: EigenFrame, phases: PhaseTable):
    """g(t, s) for node-aligned t and s (scalar or array s <= t).

    Equal to (thetadot(t) thetadot(s) / 4) exp[i (Lambda(t) - Lambda(s))];
    at t = s this is +|<E1|dE0>|^2, real and positive.
    """
    dt = frame.grid.dt
    lam_t = phases.fine[_phase_index(t, dt)]
    lam_s = phases.fine[_phase_index(s, dt)]
    half_t = 0.5 * frame.sweep.angle_velocity(t)
    half_s = 0.5 * frame.sweep.angle_velocity(s)
    return half_t * half_s * np.exp(1j * (lam_t - lam_s))


@dataclass(frozen=True)
class Psi0Curve:
    """Complex amplitude on the target eigenstate along the sweep."""

    grid: TimeGrid
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (self.grid.n_steps + 1,):
            raise ValueError(
                f"amplitudes must have shape ({self.grid.n_steps + 1},), got {amp.shape}"
            )
        if not np.all(np.isfinite(amp)):
            raise ValueError("amplitudes must be finite")
        mags = np.abs(amp)
        if abs(mags[0] - 1.0) > 1.0e-12:
            raise ValueError("the sweep must start fully on the target eigenstate")
        if np.max(mags) > 1.0 + _ABS_TOLERANCE:
            raise ValueError(
                f"|psi_0| exceeded 1 by more than {_ABS_TOLERANCE:g}; "
                "refine the grid or check the kernel"
            )
        object.__setattr__(self, "amplitudes", amp)

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(self.amplitudes)

    @property
    def final_magnitude(self) -> float:
        return float(np.abs(self.amplitudes[-1]))


def _kernel_factors(sweep, control, grid):
    """u(t), v(s) with g(t, s) = u(t) v(s), plus the phase table."""
    phases = dynamical_phases(sweep, control, grid)
    half = 0.5 * sweep.angle_velocity(grid.times)
    lam = phases.nodes
    u = half * np.exp(1j * lam)
    v = half * np.exp(-1j * lam)
    return u, v, phases


def solve_psi0(
    sweep: SweepSpec, control: Optional[SampledSignal], grid: TimeGrid
) -> Psi0Curve:
    """Production path: Volterra integro-differential solve of psi_0.

    Local rate is zero (real gauge kills the Berry term); the kernel rows
    are supplied to numerics.volterra_solve as a vectorised callable.
    """
    u, v, _ = _kernel_factors(sweep, control, grid)
    dt = grid.dt

    def kernel(t: float, s_arr: np.ndarray) -> np.ndarray:
        i = int(round(t / dt))
        j = np.rint(np.asarray(s_arr) / dt).astype(int)
        return u[i] * v[j]

    amplitudes = volterra_solve(None, kernel, grid, 1.0 + 0.0j)
    return Psi0Curve(grid, amplitudes)


def tdse_components(
    sweep: SweepSpec, control: Optional[SampledSignal], grid: TimeGrid
) -> tuple[np.ndarray, PhaseTable]:
    """RK4 integration of the two-component adiabatic-frame equation.

    Returns the (n+1, 2) array of amplitudes (psi_0, psi_1) and the phase
    table; the off-diagonal couplings oscillate with exp(+-i Lambda(t)) and
    the diagonal ones vanish in the real gauge.
    """
    phases = dynamical_phases(sweep, control, grid)
    fine = phases.fine
    dt = grid.dt

    def derivative(t: float, y: np.ndarray) -> np.ndarray:
        lam = fine[int(round(t / (0.5 * dt)))]
        half = 0.5 * sweep.angle_velocity(t)
        return np.array(
            [
                -half * np.exp(1j * lam) * y[1],
                half * np.exp(-1j * lam) * y[0],
            ]
        )

    out = np.empty((grid.n_steps + 1, 2), dtype=complex)
    out[0] = (1.0, 0.0)
    y = out[0]
    for k in range(grid.n_steps):
        y = rk4_step(derivative, grid.times[k], y, dt)
        out[k + 1] = y
    return out, phases


def tdse_oracle(
    sweep: SweepSpec, control: Optional[SampledSignal], grid: TimeGrid
) -> Psi0Curve:
    components, _ = tdse_components(sweep, control, grid)
    return Psi0Curve(grid, components[:, 0])


def adiabatic_defect(
    psi0: Psi0Curve,
    kernel: Callable[[float, np.ndarray], np.ndarray],
    grid: TimeGrid,
) -> np.ndarray:
    """|int_0^t g(t, s) psi_0(s) ds| per node: the adiabaticity residual.

    The sweep is adiabatic exactly where this stays near zero; it also
    equals |d psi_0/dt|, so it measures how hard the amplitude is being
    driven off the target eigenstate.
    """
    y = psi0.amplitudes
    times = grid.times
    dt = grid.dt
    out = np.zeros(grid.n_steps + 1)
    for i in range(1, grid.n_steps + 1):
        integrand = kernel(times[i], times[: i + 1]) * y[: i + 1]
        val = dt * (np.sum(integrand) - 0.5 * (integrand[0] + integrand[i]))
        out[i] = abs(val)
    return out


def passage_kernel(
    sweep: SweepSpec, control: Optional[SampledSignal], grid: TimeGrid
) -> Callable[[float, np.ndarray], np.ndarray]:
    """The g(t, s) callable for this sweep, for defect evaluation."""
    u, v, _ = _kernel_factors(sweep, control, grid)
    dt = grid.dt

    def kernel(t: float, s_arr: np.ndarray) -> np.ndarray:
        i = int(round(t / dt))
        j = np.rint(np.asarray(s_arr) / dt).astype(int)
        return u[i] * v[j]

    return kernel


@dataclass(frozen=True)
class PassageEnsemble:
    """Noise-averaged sweep outcome: mean |psi_0|, its stderr, mean defect."""

    grid: TimeGrid
    mean_magnitude: np.ndarray
    stderr: np.ndarray
    n_traj: int
    mean_defect: Optional[np.ndarray] = None


@dataclass(frozen=True)
class _PassageBlock:
    sweep: SweepSpec
    family: SignalFamily
    master_seed: int
    grid: TimeGrid
    with_defect: bool
    start: int
    stop: int


def _run_passage_block(block: _PassageBlock) -> tuple[np.ndarray, np.ndarray]:
    n_pts = block.grid.n_steps + 1
    mags = np.empty((block.stop - block.start, n_pts))
    defects = np.zeros((block.stop - block.start, n_pts))
    for row, k in enumerate(range(block.start, block.stop)):
        control = block.family.sample(substream(block.master_seed, k), block.grid)
        try:
            curve = solve_psi0(block.sweep, control, block.grid)
        except NumericOverflowError as exc:
            raise NumericOverflowError(f"trajectory {k}: {exc}") from exc
        mags[row] = curve.magnitudes
        if block.with_defect:
            kernel = passage_kernel(block.sweep, control, block.grid)
            defects[row] = adiabatic_defect(curve, kernel, block.grid)
    return mags, defects


_BLOCK = 8


def ensemble_passage(
    sweep: SweepSpec,
    family: SignalFamily,
    n_traj: int,
    master_seed: int,
    grid: TimeGrid,
    map_fn: Callable[..., Iterable] = map,
    with_defect: bool = False,
) -> PassageEnsemble:
    """Average the sweep over control-noise realisations.

    Same contract as the memory ensembles: trajectory k draws substream
    (master_seed, k), work is split in fixed blocks, and the reduction is
    sequential in index order, so results do not depend on worker count.
    """
    if n_traj < 1:
        raise ValueError(f"n_traj must be >= 1, got {n_traj}")
    blocks = [
        _PassageBlock(sweep, family, master_seed, grid, with_defect, lo, min(lo + _BLOCK, n_traj))
        for lo in range(0, n_traj, _BLOCK)
    ]
    results = list(map_fn(_run_passage_block, blocks))
    mags = np.concatenate([r[0] for r in results], axis=0)
    mean = mags.mean(axis=0)
    if n_traj > 1:
        stderr = mags.std(axis=0, ddof=1) / np.sqrt(n_traj)
    else:
        stderr = np.zeros_like(mean)
    mean_defect = None
    if with_defect:
        mean_defect = np.concatenate([r[1] for r in results], axis=0).mean(axis=0)
    return PassageEnsemble(
        grid=grid,
        mean_magnitude=mean,
        stderr=stderr,
        n_traj=n_traj,
        mean_defect=mean_defect,
    )

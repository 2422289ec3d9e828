"""pulseguard: qubit memory under fast-signal control, plus shortcut-to-adiabaticity sweeps.

Simulates a two-level system coupled to an Ornstein-Uhlenbeck bath under
frequency-modulating control signals (regular, jittered, chaotic, and shot-noise
pulse trains), via an exact convolutionless kernel and a second-order
master-equation bound, and solves the finite-time avoided-crossing passage
through an equivalent Volterra equation for the adiabatic amplitude.
"""

__version__ = "0.1.0"

from .numerics import NumericOverflowError, TimeGrid, volterra_solve
from .bath import BathSpec, ou_correlation
from .signals import (
    ChaoticSpec,
    JitterSpec,
    PulseTrainSpec,
    SampledSignal,
    ShotNoiseSpec,
    SignalFamily,
    effective_frequency,
    sample_family,
    substream,
)
from .qsd import (
    FidelityCurve,
    InitialState,
    KernelCurve,
    default_state_grid,
    ensemble_fidelity,
    qsd_fidelity,
    solve_kernel_quadrature,
    solve_kernel_riccati,
)
from .me2 import LeakageKernel, accumulated_phase, leakage_kernel, me2_fidelity
from .adiabatic import (
    PassageEnsemble,
    Psi0Curve,
    SweepSpec,
    adiabatic_defect,
    ensemble_passage,
    passage_kernel,
    solve_psi0,
    tdse_oracle,
)
from .runner import (
    ConfigError,
    ExperimentConfig,
    ResultTable,
    emit_csv,
    emit_plot,
    load_config,
    read_embedded_config,
    run_experiment,
)

__all__ = [
    "__version__",
    "NumericOverflowError",
    "TimeGrid",
    "volterra_solve",
    "BathSpec",
    "ou_correlation",
    "ChaoticSpec",
    "JitterSpec",
    "PulseTrainSpec",
    "SampledSignal",
    "ShotNoiseSpec",
    "SignalFamily",
    "effective_frequency",
    "sample_family",
    "substream",
    "FidelityCurve",
    "InitialState",
    "KernelCurve",
    "default_state_grid",
    "ensemble_fidelity",
    "qsd_fidelity",
    "solve_kernel_quadrature",
    "solve_kernel_riccati",
    "LeakageKernel",
    "accumulated_phase",
    "leakage_kernel",
    "me2_fidelity",
    "PassageEnsemble",
    "Psi0Curve",
    "SweepSpec",
    "adiabatic_defect",
    "ensemble_passage",
    "passage_kernel",
    "solve_psi0",
    "tdse_oracle",
    "ConfigError",
    "ExperimentConfig",
    "ResultTable",
    "emit_csv",
    "emit_plot",
    "load_config",
    "read_embedded_config",
    "run_experiment",
]

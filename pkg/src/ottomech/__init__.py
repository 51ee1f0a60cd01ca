"""Quantum-trajectory simulator of a continuously monitored optomechanical Otto engine.

The package propagates pure-state trajectories of a linearized two-mode
optomechanical system (photon mode coupled to a phonon mode) through a
four-stroke Otto cycle in which the pump-cavity detuning is the swept
control parameter.  Photon-number monitoring is modelled by diffusive
stochastic Schroedinger equations (dispersive or absorptive scheme), and
the optical / mechanical baths by Monte-Carlo wave-function jumps.  Work,
heat, efficiency and work-fluctuation statistics are accumulated over
trajectory ensembles.

Units: hbar = 1 and the mechanical frequency omega_m is the frequency
unit, so energies are in units of hbar*omega_m and times in 1/omega_m.

Layout:
    qops     truncated two-mode Fock-space operator algebra
    model    Hamiltonian, normal modes (polaritons), detuning schedules
    traj     stochastic integrators (reference, per-state)
    lindblad deterministic master-equation integrator (oracle route)
    engine   Otto-cycle orchestration and ensemble statistics
    cli      configuration files, sweeps, CSV emission
"""

import os as _os

# Pin BLAS thread pools before numpy is first imported so that ensemble
# results are independent of the ambient thread configuration.  Trajectory
# parallelism is handled explicitly (numba threads over trajectories).
for _var in ("OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "OMP_NUM_THREADS"):
    _os.environ.setdefault(_var, "1")

from .errors import (
    OttomechError,
    ConfigurationError,
    ShapeError,
    StabilityError,
    IntegratorError,
)
from .qops import SpaceDims, QOperator, QState, annihilation, number_op, expectation, apply
from .model import (
    ModelParams,
    PolaritonData,
    Schedule,
    hamiltonian,
    normal_mode_frequencies,
    polariton_data,
    make_schedule,
    schedule_delta,
)
from .traj import (
    MeasurementConfig,
    StepperConfig,
    RNGStream,
    sse_step_dispersive,
    sse_step_absorptive,
    jump_step_baths,
    hamiltonian_step,
)
from .engine import (
    CycleConfig,
    HistogramSpec,
    TrajectoryRecord,
    CycleResult,
    sample_initial_state,
    prepare_polariton_fock,
    run_trajectory,
    run_ensemble,
    work_increment,
    heat_bookkeeping,
    ensemble_statistics,
)

__version__ = "0.1.0"

__all__ = [
    "OttomechError", "ConfigurationError", "ShapeError", "StabilityError",
    "IntegratorError",
    "SpaceDims", "QOperator", "QState", "annihilation", "number_op",
    "expectation", "apply",
    "ModelParams", "PolaritonData", "Schedule", "hamiltonian",
    "normal_mode_frequencies", "polariton_data", "make_schedule",
    "schedule_delta",
    "MeasurementConfig", "StepperConfig", "RNGStream", "sse_step_dispersive",
    "sse_step_absorptive", "jump_step_baths", "hamiltonian_step",
    "CycleConfig", "HistogramSpec", "TrajectoryRecord", "CycleResult",
    "sample_initial_state", "prepare_polariton_fock", "run_trajectory",
    "run_ensemble", "work_increment", "heat_bookkeeping",
    "ensemble_statistics",
    "__version__",
]

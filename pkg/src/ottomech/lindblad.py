"""Deterministic Lindblad master-equation integrator.

This is the oracle side of the unraveling-consistency check: trajectory
ensembles from ``ottomech.engine`` must average to the solution computed
here, so this module deliberately shares no stepping code with the
trajectory integrators.  Dense fixed-step 4th-order Runge-Kutta is plenty
at the Hilbert-space sizes used for cross-validation.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .model import ModelParams
from .qops import SpaceDims, annihilation, number_op
from .traj import MeasurementConfig


def bath_collapse_ops(
    params: ModelParams, dims: SpaceDims
) -> list[tuple[float, np.ndarray]]:
    """(rate, operator) pairs for the optical and mechanical baths."""
    a = annihilation(dims, "photon").matrix
    b = annihilation(dims, "phonon").matrix
    ops = []
    if params.kappa > 0:
        ops.append((params.kappa, a))
    if params.gamma > 0:
        ops.append((params.gamma * (params.nbar_th + 1), b))
        if params.nbar_th > 0:
            ops.append((params.gamma * params.nbar_th, b.conj().T))
    return ops


def measurement_collapse_op(
    meas: MeasurementConfig, dims: SpaceDims
) -> list[tuple[float, np.ndarray]]:
    """Dissipator equivalent of the measurement channel: the ensemble
    average of the dispersive/absorptive unraveling is lambda_d D[n_a] /
    lambda_a D[a]."""
    if not meas.active:
        return []
    if meas.scheme == "dispersive":
        return [(meas.lam, number_op(dims, "photon").matrix)]
    return [(meas.lam, annihilation(dims, "photon").matrix)]


def lindblad_rhs(
    rho: np.ndarray, H: np.ndarray, collapse: Sequence[tuple[float, np.ndarray]]
) -> np.ndarray:
    out = -1j * (H @ rho - rho @ H)
    for rate, L in collapse:
        Ld = L.conj().T
        LdL = Ld @ L
        out += rate * (L @ rho @ Ld - 0.5 * (LdL @ rho + rho @ LdL))
    return out


def integrate_lindblad(
    hamiltonian,
    collapse: Sequence[tuple[float, np.ndarray]],
    rho0: np.ndarray,
    t_final: float,
    dt: float,
    checkpoints: Sequence[float] = (),
) -> list[np.ndarray]:
    """RK4-integrate d rho/dt = -i[H, rho] + sum_k r_k D[L_k] rho.

    ``hamiltonian`` is either a constant matrix or a callable t -> matrix.
    Returns the density matrices at the requested checkpoint times (each
    rounded to the nearest step boundary), final time included implicitly
    if listed.
    """
    H_of = hamiltonian if callable(hamiltonian) else (lambda t: hamiltonian)
    nsteps = int(round(t_final / dt))
    targets = sorted(int(round(tc / dt)) for tc in checkpoints)
    if any(k < 0 or k > nsteps for k in targets):
        raise ValueError("checkpoint outside [0, t_final]")
    rho = np.array(rho0, dtype=np.complex128)
    out: list[np.ndarray] = []
    next_i = 0
    while next_i < len(targets) and targets[next_i] == 0:
        out.append(rho.copy())
        next_i += 1
    for k in range(nsteps):
        t = k * dt
        k1 = lindblad_rhs(rho, H_of(t), collapse)
        k2 = lindblad_rhs(rho + 0.5 * dt * k1, H_of(t + 0.5 * dt), collapse)
        k3 = lindblad_rhs(rho + 0.5 * dt * k2, H_of(t + 0.5 * dt), collapse)
        k4 = lindblad_rhs(rho + dt * k3, H_of(t + dt), collapse)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        while next_i < len(targets) and targets[next_i] == k + 1:
            out.append(rho.copy())
            next_i += 1
    return out


def trace_distance(rho1: np.ndarray, rho2: np.ndarray) -> float:
    """(1/2) ||rho1 - rho2||_1 for Hermitian arguments."""
    diff = rho1 - rho2
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))

"""Linearized optomechanical Hamiltonian and its normal-mode (polariton) analysis.

The fluctuation Hamiltonian in units of hbar*omega_m is

    H(delta) = -delta * n_a + omega_m * n_b + G (a + a^dag)(b + b^dag),

with the pump-cavity detuning ``delta < 0`` the externally swept control.
H is linear in delta, so dH/d(delta) = -n_a exactly; that derivative is
what turns a photon-number record into a work record.

Diagonalizing the quadratic form gives two polariton branches.  Their
frequencies obey

    omega_{A,B}^2 = [delta^2 + omega_m^2 +- sqrt(D)] / 2,
    D = (delta^2 - omega_m^2)^2 - 16 G^2 delta omega_m,

and the branches are labeled A = upper, B = lower at every detuning, so
labels are continuous through the avoided crossing at delta = -omega_m
(minimum splitting ~ 2G).  The Bogoliubov transformation itself is built
numerically by Williamson (symplectic) diagonalization of the 4x4
quadrature form, which is robust at all detunings and independent of the
closed-form frequency expression; the two routes are cross-checked in the
test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import ConfigurationError, DomainError, StabilityError
from .qops import QOperator, SpaceDims, annihilation, quadrature

#: Standard symplectic form for quadrature ordering (x_a, p_a, x_b, p_b).
SYMPLECTIC_FORM = np.array(
    [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], dtype=float
)

SCHEDULE_KINDS = ("linear", "gap_adaptive")


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the linearized engine (frequencies and rates
    in units of omega_m; hbar = 1).

    delta_i / delta_f are the detuning endpoints of the adiabatic strokes;
    the sweep crosses the avoided crossing, so delta_i < -omega_m <
    delta_f < 0.  nbar_th is the thermal phonon occupation of the hot
    mechanical bath; the optical bath is at zero temperature.
    """

    G: float = 0.2
    delta_i: float = -3.0
    delta_f: float = -0.4
    kappa: float = 5e-3
    gamma: float = 1e-4
    nbar_th: float = 4.0
    omega_m: float = 1.0

    def __post_init__(self):
        if self.omega_m <= 0:
            raise ConfigurationError(f"omega_m must be positive, got {self.omega_m}")
        if not (self.delta_i < -self.omega_m < self.delta_f < 0):
            raise ConfigurationError(
                "detuning endpoints must satisfy delta_i < -omega_m < delta_f < 0, "
                f"got delta_i={self.delta_i}, delta_f={self.delta_f}"
            )
        if not (0 <= self.G < self.omega_m / 2):
            raise ConfigurationError(
                f"coupling must satisfy 0 <= G < omega_m/2, got G={self.G}"
            )
        for name, v in (("kappa", self.kappa), ("gamma", self.gamma),
                        ("nbar_th", self.nbar_th)):
            if v < 0:
                raise ConfigurationError(f"{name} must be >= 0, got {v}")


@dataclass(frozen=True)
class PolaritonData:
    """Normal-mode data at one detuning.

    ``bogoliubov`` is the real symplectic matrix S mapping bare quadratures
    (x_a, p_a, x_b, p_b) to polariton quadratures (X_A, P_A, X_B, P_B);
    S Omega S^T = Omega.  ``energy_offset`` is the constant c(delta) with
    H = omega_A N_A + omega_B N_B + c; it never affects dynamics but makes
    the energy bookkeeping close exactly.
    """

    omega_A: float
    omega_B: float
    bogoliubov: np.ndarray = field(repr=False)
    N_A_op: QOperator = field(repr=False)
    N_B_op: QOperator = field(repr=False)
    energy_offset: float = 0.0


def hamiltonian(params: ModelParams, delta: float, dims: SpaceDims) -> QOperator:
    """Normal-ordered Hamiltonian at a fixed detuning; <0,0|H|0,0> = 0."""
    if delta >= 0:
        raise ConfigurationError(f"red-detuned regime requires delta < 0, got {delta}")
    a = annihilation(dims, "photon").matrix
    b = annihilation(dims, "phonon").matrix
    m = (
        -delta * (a.conj().T @ a)
        + params.omega_m * (b.conj().T @ b)
        + params.G * (a + a.conj().T) @ (b + b.conj().T)
    )
    return QOperator(dims, m, hermitian=True)


def _freq_squares(params: ModelParams, delta: float) -> tuple[float, float]:
    wm, G = params.omega_m, params.G
    disc = (delta**2 - wm**2) ** 2 - 16 * G**2 * delta * wm
    if disc < 0:
        raise StabilityError(
            f"negative normal-mode discriminant at delta={delta} (G={G})"
        )
    s = np.sqrt(disc)
    return (delta**2 + wm**2 + s) / 2, (delta**2 + wm**2 - s) / 2


def normal_mode_frequencies(params: ModelParams, delta: float) -> tuple[float, float]:
    """(omega_A, omega_B) with omega_A >= omega_B > 0.

    Raises StabilityError when a squared frequency is non-positive, which
    for red detuning happens when 4 G^2 >= |delta| * omega_m.
    """
    wa2, wb2 = _freq_squares(params, delta)
    if wb2 <= 0:
        raise StabilityError(
            f"unstable parameter set: omega_B^2 = {wb2:.3e} <= 0 at delta={delta} "
            f"(need 4 G^2 < |delta| omega_m)"
        )
    return float(np.sqrt(wa2)), float(np.sqrt(wb2))


def quadrature_form(params: ModelParams, delta: float) -> np.ndarray:
    """Coefficient matrix M of H = (1/2) r^T M r + const over
    r = (x_a, p_a, x_b, p_b)."""
    M = np.zeros((4, 4))
    M[0, 0] = M[1, 1] = -delta
    M[2, 2] = M[3, 3] = params.omega_m
    M[0, 2] = M[2, 0] = 2 * params.G
    return M


def williamson(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symplectic diagonalization of a positive-definite quadratic form.

    Returns (freqs, S) with freqs sorted descending, S symplectic and
    M = S^T diag(freqs repeated) S.  Uses the real Schur form of
    M^(1/2) Omega M^(1/2), which is block-diagonal because that matrix is
    antisymmetric (hence normal).
    """
    eigs = np.linalg.eigvalsh(M)
    if eigs[0] <= 0:
        raise StabilityError(
            f"quadratic form is not positive definite (min eigenvalue {eigs[0]:.3e})"
        )
    Mh = sla.sqrtm(M).real
    W = Mh @ SYMPLECTIC_FORM @ Mh
    J, Q = sla.schur(W)
    n = M.shape[0] // 2
    for i in range(n):
        if J[2 * i, 2 * i + 1] < 0:
            Q[:, [2 * i, 2 * i + 1]] = Q[:, [2 * i + 1, 2 * i]]
    J = Q.T @ W @ Q
    freqs = np.array([J[2 * i, 2 * i + 1] for i in range(n)])
    order = np.argsort(-freqs)
    cols = np.ravel([[2 * k, 2 * k + 1] for k in order])
    Q = Q[:, cols]
    freqs = freqs[order]
    S = np.diag(np.repeat(freqs**-0.5, 2)) @ Q.T @ Mh
    return freqs, S


def energy_offset(params: ModelParams, delta: float) -> float:
    """Constant c(delta) in H = omega_A N_A + omega_B N_B + c."""
    wa, wb = normal_mode_frequencies(params, delta)
    return (wa + wb + delta - params.omega_m) / 2


def polariton_data(params: ModelParams, delta: float, dims: SpaceDims) -> PolaritonData:
    """Polariton frequencies, Bogoliubov matrix and number operators.

    N_A and N_B are quadratic forms in the bare quadratures built from the
    symplectic rows of S: N = (X^2 + P^2)/2 - 1/2.  On the truncated space
    the identity H = omega_A N_A + omega_B N_B + c holds exactly away from
    the top two Fock levels of each mode.
    """
    freqs, S = williamson(quadrature_form(params, delta))
    r = [
        quadrature(dims, "photon", "x").matrix,
        quadrature(dims, "photon", "p").matrix,
        quadrature(dims, "phonon", "x").matrix,
        quadrature(dims, "phonon", "p").matrix,
    ]
    eye = np.eye(dims.total)

    def nop(row_x: int, row_p: int) -> QOperator:
        X = sum(S[row_x, k] * r[k] for k in range(4))
        P = sum(S[row_p, k] * r[k] for k in range(4))
        return QOperator(dims, (X @ X + P @ P) / 2 - eye / 2, hermitian=True)

    return PolaritonData(
        omega_A=float(freqs[0]),
        omega_B=float(freqs[1]),
        bogoliubov=S,
        N_A_op=nop(0, 1),
        N_B_op=nop(2, 3),
        energy_offset=(freqs[0] + freqs[1] + delta - params.omega_m) / 2,
    )


@dataclass(frozen=True)
class Schedule:
    """Monotone detuning ramp delta(t) over one adiabatic stroke.

    ``linear`` interpolates the endpoints; ``gap_adaptive`` makes
    |d delta/dt| proportional to the squared local normal-mode gap
    (omega_A - omega_B)^2, i.e. fast far from the avoided crossing and
    slow in its vicinity, rescaled so delta(t_stroke) = delta_end exactly.
    """

    kind: str
    t_stroke: float
    delta_start: float
    delta_end: float
    _times: np.ndarray = field(repr=False)
    _deltas: np.ndarray = field(repr=False)


def make_schedule(
    params: ModelParams,
    kind: str,
    t_stroke: float,
    delta_start: float,
    delta_end: float,
    ngrid: int = 4001,
) -> Schedule:
    if kind not in SCHEDULE_KINDS:
        raise ConfigurationError(f"schedule kind must be one of {SCHEDULE_KINDS}")
    if t_stroke <= 0:
        raise ConfigurationError(f"t_stroke must be positive, got {t_stroke}")
    if delta_start == delta_end or kind == "linear":
        times = np.array([0.0, t_stroke])
        deltas = np.array([delta_start, delta_end], dtype=float)
        return Schedule(kind, t_stroke, delta_start, delta_end, times, deltas)

    deltas = np.linspace(delta_start, delta_end, ngrid)
    gaps = np.empty(ngrid)
    for i, d in enumerate(deltas):
        wa, wb = normal_mode_frequencies(params, d)
        gaps[i] = wa - wb
    # dt = |d delta| / (c * gap^2); accumulate by trapezoid, then rescale.
    inv = gaps**-2
    seg = 0.5 * (inv[1:] + inv[:-1]) * np.abs(np.diff(deltas))
    times = np.concatenate([[0.0], np.cumsum(seg)])
    times *= t_stroke / times[-1]
    return Schedule(kind, t_stroke, delta_start, delta_end, times, deltas)


def schedule_delta(schedule: Schedule, t):
    """delta(t) for scalar or array t in [0, t_stroke]."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > schedule.t_stroke * (1 + 1e-12)):
        raise DomainError(
            f"time outside [0, {schedule.t_stroke}] for this schedule: {t!r}"
        )
    out = np.interp(t_arr, schedule._times, schedule._deltas)
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out

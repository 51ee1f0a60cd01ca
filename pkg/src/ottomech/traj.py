"""Reference stochastic integrators, one state and one time step at a time.

Two diffusive measurement unravelings are implemented as norm-preserving
stochastic Schroedinger equations driven by a Wiener increment dw with
E[dw] = 0 and E[dw^2] = dt:

  dispersive (QND photon-number probe, strength lambda_d)
      d|psi> = { -1/2 lambda_d (n_a - <n_a>)^2 dt
                 + sqrt(lambda_d) (n_a - <n_a>) dw } |psi>

  absorptive (resonant probe removing photons, strength lambda_a)
      d|psi> = { -1/2 lambda_a (a^dag a - <a+a^dag> a + <a+a^dag>^2/4) dt
                 + sqrt(lambda_a) (a - <a+a^dag>/2) dw } |psi>

Ensemble averages of these trajectories reproduce the deterministic master
equations with dissipators lambda_d D[n_a] and lambda_a D[a] respectively
(verified against ``ottomech.lindblad``).  The unobserved optical and
mechanical baths are unraveled by Monte-Carlo wave-function jumps instead:
channels sqrt(kappa) a, sqrt(gamma (nbar+1)) b and sqrt(gamma nbar) b^dag.

These functions are the readable contract implementations; the batched
numba kernel in ``ottomech._kernel`` applies the same update formulas and
is tested for agreement step by step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, IntegratorError
from .model import ModelParams
from .qops import QOperator, QState, annihilation

SCHEMES = ("none", "absorptive", "dispersive")

#: pre-renormalization norm below which the step is declared collapsed
NORM_COLLAPSE = 1e-8

#: largest tolerated single-step cumulative jump probability
MAX_JUMP_PROB = 0.1


@dataclass(frozen=True)
class MeasurementConfig:
    """Monitoring scheme and strength lambda (lambda_a or lambda_d)."""

    scheme: str = "none"
    lam: float = 0.0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.lam < 0:
            raise ConfigurationError(f"measurement strength must be >= 0, got {self.lam}")

    @property
    def active(self) -> bool:
        return self.scheme != "none" and self.lam > 0


@dataclass(frozen=True)
class StepperConfig:
    """Integration step sizes and the master seed.

    ``dt`` governs the work strokes and any monitored stroke; the cross
    constraints dt*lambda <= 0.01 and dt*max(omega_A) <= 0.05 are enforced
    when a full cycle configuration is validated.  ``dt_thermal`` is the
    coarser step used for unmonitored fixed-detuning thermalization
    strokes, where only the jump statistics matter.
    """

    dt: float = 5e-3
    seed: int = 12345
    renorm_every_step: bool = True
    dt_thermal: float = 0.05

    def __post_init__(self):
        if not (0 < self.dt):
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if not (0 < self.dt_thermal):
            raise ConfigurationError(f"dt_thermal must be positive, got {self.dt_thermal}")
        if not (0 <= int(self.seed) < 2**64):
            raise ConfigurationError("seed must fit an unsigned 64-bit integer")


@dataclass
class RNGStream:
    """Counter-based per-trajectory random stream.

    The stream is a Philox generator keyed by (master seed, trajectory
    index), so identical pairs give identical Wiener increments and jump
    decisions on every run and under any trajectory batching or worker
    count.  Draws are consumed strictly sequentially.
    """

    master_seed: int
    index: int
    _gen: np.random.Generator | None = field(default=None, repr=False)

    def generator(self) -> np.random.Generator:
        if self._gen is None:
            key = np.array([self.master_seed, self.index], dtype=np.uint64)
            self._gen = np.random.Generator(np.random.Philox(key=key))
        return self._gen

    def normals(self, n: int, scale: float = 1.0) -> np.ndarray:
        return self.generator().normal(0.0, scale, n)

    def uniforms(self, n: int) -> np.ndarray:
        return self.generator().uniform(size=n)

    def uniform(self) -> float:
        return float(self.generator().uniform())


def _renormalized(vector: np.ndarray, dims, dt: float) -> QState:
    n = np.linalg.norm(vector)
    if n < NORM_COLLAPSE:
        raise IntegratorError(
            f"state norm collapsed to {n:.2e} before renormalization; "
            f"reduce the time step (dt={dt})"
        )
    return QState(dims, vector / n)


def sse_step_dispersive(
    state: QState, n_op: QOperator, lambda_d: float, dt: float, dw: float
) -> QState:
    """One Euler-Maruyama step of the dispersive (QND) unraveling.

    Eigenstates of n_a are fixed points for any dw; the ensemble mean of
    <n_a> is conserved whenever [H, n_a] = 0.
    """
    psi = state.vector
    npsi = n_op.matrix @ psi
    mu = np.real(np.vdot(psi, npsi))
    dev = npsi - mu * psi
    dev2 = n_op.matrix @ npsi - 2 * mu * npsi + mu * mu * psi
    out = psi + dt * (-0.5 * lambda_d) * dev2 + np.sqrt(lambda_d) * dw * dev
    return _renormalized(out, state.dims, dt)


def sse_step_absorptive(
    state: QState, a_op: QOperator, lambda_a: float, dt: float, dw: float
) -> QState:
    """One Euler-Maruyama step of the absorptive (homodyne-type) unraveling.

    The photon vacuum is a dark state; the ensemble mean photon number
    decays at rate lambda_a.
    """
    psi = state.vector
    a = a_op.matrix
    apsi = a @ psi
    c = 2 * np.real(np.vdot(psi, apsi))  # <a + a^dag>
    drift = -0.5 * lambda_a * (a.conj().T @ apsi - c * apsi + 0.25 * c * c * psi)
    diff = np.sqrt(lambda_a) * (apsi - 0.5 * c * psi)
    out = psi + dt * drift + dw * diff
    return _renormalized(out, state.dims, dt)


def jump_step_baths(
    state: QState, params: ModelParams, dt: float, rng: RNGStream
) -> QState:
    """One first-order Monte-Carlo wave-function step of the bath channels.

    Channels: sqrt(kappa) a (zero-temperature cavity bath),
    sqrt(gamma (nbar+1)) b and sqrt(gamma nbar) b^dag (thermal mechanical
    bath).  Consumes one uniform for the jump decision and, on a jump, a
    second uniform for the channel choice.
    """
    dims = state.dims
    psi = state.vector
    a = annihilation(dims, "photon").matrix
    b = annihilation(dims, "phonon").matrix
    na = np.real(np.vdot(psi, (a.conj().T @ (a @ psi))))
    nb = np.real(np.vdot(psi, (b.conj().T @ (b @ psi))))
    bd_psi = b.conj().T @ psi
    bbd = np.real(np.vdot(bd_psi, bd_psi))  # truncated <b b^dag>
    rates = (params.kappa, params.gamma * (params.nbar_th + 1), params.gamma * params.nbar_th)
    probs = np.array([dt * rates[0] * na, dt * rates[1] * nb, dt * rates[2] * bbd])
    ptot = float(probs.sum())
    if ptot > MAX_JUMP_PROB:
        raise IntegratorError(
            f"cumulative jump probability {ptot:.3f} > {MAX_JUMP_PROB} in one step; "
            f"reduce the time step (dt={dt})"
        )
    u = rng.uniform()
    if u < ptot:
        which = int(np.searchsorted(np.cumsum(probs), rng.uniform() * ptot))
        op = (a, b, b.conj().T)[min(which, 2)]
        return _renormalized(op @ psi, dims, dt)
    # no-jump branch: first-order non-Hermitian drift
    gamma_diag = (
        rates[0] * (a.conj().T @ a)
        + rates[1] * (b.conj().T @ b)
        + rates[2] * (b @ b.conj().T)
    )
    out = psi - 0.5 * dt * (gamma_diag @ psi)
    return _renormalized(out, dims, dt)


def hamiltonian_step(state: QState, H: QOperator, dt: float) -> QState:
    """One unitary micro-step with the midpoint Hamiltonian.

    Uses the Cayley (Crank-Nicolson) transform
    (1 + i H dt/2)^(-1) (1 - i H dt/2), which is exactly unitary for
    Hermitian H and second-order accurate in dt.  The caller supplies H
    evaluated at the midpoint of the step.
    """
    psi = state.vector
    m = 0.5j * dt * H.matrix
    eye = np.eye(state.dims.total)
    rhs = psi - m @ psi
    out = np.linalg.solve(eye + m, rhs)
    return _renormalized(out, state.dims, dt)

"""Four-stroke Otto cycle orchestration and ensemble statistics.

Cycle layout (detuning delta is the control; work accrues only while it
moves, dW = -<n_a> d(delta)):

    stroke 1   sweep delta_i -> delta_f over t1, monitored, work output
    stroke 2   fixed delta_f for t2, cold (optical) bath drains polariton B
    stroke 3   sweep delta_f -> delta_i over t3, monitored
    stroke 4   fixed delta_i: either evolve for t4 with the baths or draw a
               fresh thermal sample (the hot bath erases state memory; with
               the default gamma*t4 = 4 the resample shortcut is what the
               evolve mode relaxes to, and it dominates runtime otherwise)

Heat bookkeeping uses <H> at stroke boundaries: during strokes 2 and 4 the
Hamiltonian is constant, so all energy change there is heat; q_in is the
stroke-4 gain.

Every trajectory owns a counter-based random stream keyed by (master seed,
trajectory index).  Per trajectory the stream is consumed in a fixed
order: one uniform for the initial sample, then per simulated stroke and
per time chunk (at most ``_CHUNK_STEPS`` steps) a block of Wiener
increments, a block of jump uniforms and a block of channel uniforms, and
finally one uniform for the stroke-4 resample.  Blocks are drawn whether
or not a channel is active, so runs with measurement off reuse the exact
trajectories of the lambda = 0 limit.  Results are therefore independent
of batch size and worker count, bit for bit.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import _kernel
from .errors import ConfigurationError, IntegratorError, OttomechError
from .model import (
    ModelParams,
    Schedule,
    hamiltonian,
    make_schedule,
    normal_mode_frequencies,
    quadrature_form,
    schedule_delta,
    williamson,
)
from .qops import QState, SpaceDims, expectation, number_op
from .traj import MeasurementConfig, RNGStream, StepperConfig

_CHUNK_STEPS = 10000

#: flat ordering of the symmetrized second moments (upper triangle of
#: (x_a, p_a, x_b, p_b) pairs) as produced by the kernel
_PAIRS = [(i, j) for i in range(4) for j in range(i, 4)]
_PAIR_INDEX = {p: k for k, p in enumerate(_PAIRS)}

STROKE4_MODES = ("resample", "evolve")
INITIAL_BASES = ("bare", "polariton")


@dataclass(frozen=True)
class HistogramSpec:
    """Fixed-width bins for P(-W); samples outside [lo, hi] are counted
    into the nearest edge bin so the masses always sum to one."""

    lo: float = -1.0
    hi: float = 6.0
    width: float = 0.1

    def __post_init__(self):
        if not (self.hi > self.lo and self.width > 0):
            raise ConfigurationError(f"bad histogram spec {self}")
        n = (self.hi - self.lo) / self.width
        if abs(n - round(n)) > 1e-9:
            raise ConfigurationError("histogram width must tile [lo, hi] exactly")

    @property
    def n_bins(self) -> int:
        return int(round((self.hi - self.lo) / self.width))

    def centers(self) -> np.ndarray:
        return self.lo + self.width * (np.arange(self.n_bins) + 0.5)

    def probabilities(self, values: np.ndarray) -> np.ndarray:
        idx = np.floor((np.asarray(values) - self.lo) / self.width).astype(np.int64)
        idx = np.clip(idx, 0, self.n_bins - 1)
        counts = np.bincount(idx, minlength=self.n_bins)
        return counts / max(len(values), 1)


@dataclass(frozen=True)
class CycleConfig:
    """Fully resolved description of one engine run."""

    params: ModelParams = ModelParams()
    meas: MeasurementConfig = MeasurementConfig()
    stepper: StepperConfig = StepperConfig()
    dims: SpaceDims = SpaceDims(20, 20)
    t1: float = 40.0
    t2: float = 400.0
    t3: float = 40.0
    t4: float = 4.0e4
    n_traj: int = 20000
    stroke4_mode: str = "resample"
    schedule_kind: str = "gap_adaptive"
    meas_strokes: tuple = (1, 3)
    dissipation_strokes: tuple = (1, 2, 3, 4)
    initial_basis: str = "bare"
    initial_phonon_fock: int | None = None
    record_stride: float = 0.5
    hist: HistogramSpec = HistogramSpec()
    batch_size: int = 1024

    def validate(self) -> None:
        if self.t1 <= 0 or self.t3 <= 0:
            raise ConfigurationError("adiabatic stroke durations t1, t3 must be > 0")
        if self.t2 < 0 or self.t4 < 0:
            raise ConfigurationError("thermalization durations must be >= 0")
        if self.n_traj < 1:
            raise ConfigurationError("n_traj must be >= 1")
        if self.stroke4_mode not in STROKE4_MODES:
            raise ConfigurationError(f"stroke4_mode must be one of {STROKE4_MODES}")
        if self.initial_basis not in INITIAL_BASES:
            raise ConfigurationError(f"initial_basis must be one of {INITIAL_BASES}")
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be >= 1")
        if self.record_stride <= 0:
            raise ConfigurationError("record_stride must be > 0")
        bad = set(self.meas_strokes) - {1, 2, 3, 4}
        bad |= set(self.dissipation_strokes) - {1, 2, 3, 4}
        if bad:
            raise ConfigurationError(f"stroke labels must be in 1..4, got {sorted(bad)}")
        if self.initial_phonon_fock is not None and not (
            0 <= self.initial_phonon_fock < self.dims.n_phonon
        ):
            raise ConfigurationError(
                f"initial_phonon_fock must be in [0, {self.dims.n_phonon}), "
                f"got {self.initial_phonon_fock}"
            )
        # stability across the sweep and step-size constraints
        for delta in (self.params.delta_i, self.params.delta_f):
            normal_mode_frequencies(self.params, delta)
        omega_a_max = normal_mode_frequencies(self.params, self.params.delta_i)[0]
        dt = self.stepper.dt
        if dt * omega_a_max > 0.05 + 1e-12:
            raise ConfigurationError(
                f"dt * max(omega_A) = {dt * omega_a_max:.4f} exceeds 0.05; "
                f"reduce stepper.dt"
            )
        if dt * self.meas.lam > 0.01 + 1e-12:
            raise ConfigurationError(
                f"dt * lambda = {dt * self.meas.lam:.4f} exceeds 0.01; reduce stepper.dt"
            )
        _thermal_pmf(self.params.nbar_th, self.dims.n_phonon)


@dataclass
class TrajectoryRecord:
    """Everything retained from one trajectory.

    ``traj_seed`` is the per-trajectory substream index; together with the
    master seed in the run manifest it pins every random number consumed.
    The time series are strided (one sample per ``record_stride`` time
    units, stroke boundaries always included).
    """

    index: int
    traj_seed: int
    work: float
    work_strokes: np.ndarray
    t: np.ndarray
    delta: np.ndarray
    n_a: np.ndarray
    N_A: np.ndarray
    N_B: np.ndarray
    jump_count: int
    u_bounds: np.ndarray  # <H> at cycle start and after strokes 1..4
    q_in: float


@dataclass
class CycleResult:
    """Ensemble summary of one run."""

    mean_work: float
    sem_work: float
    var_work: float
    hist_centers: np.ndarray
    hist_probs: np.ndarray
    q_in: float
    efficiency: float
    q_in_warning: bool
    n_traj_used: int
    t: np.ndarray
    delta: np.ndarray
    mean_n_a: np.ndarray
    mean_N_A: np.ndarray
    mean_N_B: np.ndarray


# ---------------------------------------------------------------------------
# initial states


def _thermal_pmf(nbar: float, cutoff: int) -> np.ndarray:
    """Bose-Einstein occupation pmf truncated and renormalized at the
    cutoff; rejects configurations whose discarded tail exceeds 5%."""
    if nbar < 0:
        raise ConfigurationError(f"nbar must be >= 0, got {nbar}")
    if nbar == 0:
        pmf = np.zeros(cutoff)
        pmf[0] = 1.0
        return pmf
    r = nbar / (1.0 + nbar)
    tail = r**cutoff
    if tail > 0.05:
        raise ConfigurationError(
            f"thermal tail mass beyond the cutoff is {tail:.3f} > 5%; "
            f"raise n_phonon or lower nbar_th"
        )
    pmf = (1 - r) * r ** np.arange(cutoff)
    return pmf / pmf.sum()


def _fock_from_uniform(pmf: np.ndarray, u) -> np.ndarray:
    cdf = np.cumsum(pmf)
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(pmf) - 1)


def sample_initial_state(params: ModelParams, dims: SpaceDims, rng: RNGStream) -> QState:
    """Photon vacuum times a phonon Fock state drawn from the truncated
    thermal distribution at nbar_th.  Consumes one uniform."""
    pmf = _thermal_pmf(params.nbar_th, dims.n_phonon)
    n = int(_fock_from_uniform(pmf, rng.uniform()))
    return QState.fock(dims, 0, n)


@lru_cache(maxsize=16)
def _hamiltonian_eig(params: ModelParams, delta: float, dims: SpaceDims):
    H = hamiltonian(params, delta, dims).matrix
    evals, evecs = np.linalg.eigh(H)
    return evals, evecs


@lru_cache(maxsize=16)
def _polariton_fock_table(params: ModelParams, delta: float, dims: SpaceDims):
    """States |N_A=0, N_B=n> for n = 0..n_phonon-1, built by repeatedly
    applying the B-polariton creation operator to the interacting ground
    state, plus their energies <H>."""
    from .qops import quadrature

    _, evecs = _hamiltonian_eig(params, delta, dims)
    _, S = williamson(quadrature_form(params, delta))
    r = [
        quadrature(dims, "photon", "x").matrix,
        quadrature(dims, "photon", "p").matrix,
        quadrature(dims, "phonon", "x").matrix,
        quadrature(dims, "phonon", "p").matrix,
    ]
    XB = sum(S[2, k] * r[k] for k in range(4))
    PB = sum(S[3, k] * r[k] for k in range(4))
    bdag = (XB - 1j * PB) / np.sqrt(2.0)
    H = hamiltonian(params, delta, dims).matrix
    states = np.empty((dims.n_phonon, dims.total), dtype=np.complex128)
    energies = np.empty(dims.n_phonon)
    v = evecs[:, 0].astype(np.complex128)
    # fix the (irrelevant) global phase for reproducibility
    k0 = int(np.argmax(np.abs(v)))
    v = v * np.exp(-1j * np.angle(v[k0]))
    for n in range(dims.n_phonon):
        states[n] = v
        energies[n] = float(np.real(np.vdot(v, H @ v)))
        v = bdag @ v
        nrm = np.linalg.norm(v)
        if nrm < 1e-12:
            raise OttomechError(
                f"polariton ladder collapsed at n={n + 1}; cutoff too small"
            )
        v = v / nrm
    return states, energies


def prepare_polariton_fock(
    params: ModelParams, delta: float, dims: SpaceDims, n: int
) -> QState:
    """The n-quantum state of the lower (B) polariton branch at the given
    detuning, with the upper branch empty."""
    if not (0 <= n < dims.n_phonon):
        raise ConfigurationError(f"polariton quantum number {n} outside cutoff")
    states, _ = _polariton_fock_table(params, delta, dims)
    return QState(dims, states[n].copy())


# ---------------------------------------------------------------------------
# stroke plans and kernel tables


@dataclass
class _StrokePlan:
    stroke_no: int
    nsteps: int
    dt: float
    t_offset: float
    dknots: np.ndarray
    delta_mid: np.ndarray
    meas_on: bool
    jumps_on: bool
    rec_steps: np.ndarray
    rec_times: np.ndarray
    rec_deltas: np.ndarray


def _make_plan(
    config: CycleConfig,
    stroke_no: int,
    duration: float,
    schedule: Schedule | None,
    t_offset: float,
) -> _StrokePlan:
    meas_on = (
        stroke_no in config.meas_strokes
        and config.meas.active
    )
    jumps_on = stroke_no in config.dissipation_strokes and (
        config.params.kappa > 0 or config.params.gamma > 0
    )
    moving = schedule is not None and schedule.delta_start != schedule.delta_end
    dt = config.stepper.dt if (moving or meas_on) else config.stepper.dt_thermal
    nsteps = max(1, int(round(duration / dt)))
    dt = duration / nsteps
    tk = np.arange(nsteps + 1) * dt
    if schedule is None:
        dknots = np.full(nsteps + 1, config.params.delta_i)
        delta_mid = np.full(nsteps, config.params.delta_i)
    else:
        dknots = np.asarray(schedule_delta(schedule, tk))
        delta_mid = np.asarray(schedule_delta(schedule, (tk[:-1] + tk[1:]) / 2))
    stride = max(1, int(round(config.record_stride / dt)))
    rec = np.arange(0, nsteps + 1, stride, dtype=np.int64)
    if rec[-1] != nsteps:
        rec = np.append(rec, nsteps)
    return _StrokePlan(
        stroke_no=stroke_no,
        nsteps=nsteps,
        dt=dt,
        t_offset=t_offset,
        dknots=dknots,
        delta_mid=delta_mid,
        meas_on=meas_on,
        jumps_on=jumps_on,
        rec_steps=rec,
        rec_times=t_offset + rec * dt,
        rec_deltas=dknots[rec],
    )


def _build_plans(config: CycleConfig) -> list[_StrokePlan]:
    p = config.params
    plans = []
    t_off = 0.0
    sweep1 = make_schedule(p, config.schedule_kind, config.t1, p.delta_i, p.delta_f)
    plans.append(_make_plan(config, 1, config.t1, sweep1, t_off))
    t_off += config.t1
    if config.t2 > 0:
        hold2 = make_schedule(p, "linear", config.t2, p.delta_f, p.delta_f)
        plans.append(_make_plan(config, 2, config.t2, hold2, t_off))
        t_off += config.t2
    sweep3 = make_schedule(p, config.schedule_kind, config.t3, p.delta_f, p.delta_i)
    plans.append(_make_plan(config, 3, config.t3, sweep3, t_off))
    t_off += config.t3
    if config.stroke4_mode == "evolve" and config.t4 > 0:
        plans.append(_make_plan(config, 4, config.t4, None, t_off))
    return plans


@lru_cache(maxsize=8)
def _xquad_eig(cutoff: int):
    a = np.diag(np.sqrt(np.arange(1, cutoff)), 1)
    x = (a + a.T) / np.sqrt(2.0)
    lam, W = np.linalg.eigh(x)
    return lam, W


def _split_tables(params: ModelParams, dims: SpaceDims, dt: float, delta_mid: np.ndarray):
    la, Wa = _xquad_eig(dims.n_photon)
    lb, Wb = _xquad_eig(dims.n_phonon)
    na = np.arange(dims.n_photon)
    nb = np.arange(dims.n_phonon)
    pha = np.exp(1j * np.outer(delta_mid, na) * (dt / 2))
    phb = np.exp(-1j * params.omega_m * (dt / 2) * nb)
    vph = np.exp(-2j * params.G * dt * np.outer(la, lb))
    return (
        np.ascontiguousarray(pha),
        np.ascontiguousarray(phb),
        np.ascontiguousarray(vph),
        np.ascontiguousarray(Wa),
        np.ascontiguousarray(Wa.T),
        np.ascontiguousarray(Wb),
        np.ascontiguousarray(Wb.T),
    )


def _drift_factor(params: ModelParams, dims: SpaceDims, dt: float) -> np.ndarray:
    na = np.arange(dims.n_photon)[:, None]
    nb = np.arange(dims.n_phonon)[None, :]
    gdn = params.gamma * (params.nbar_th + 1)
    gup = params.gamma * params.nbar_th
    bbdag = (nb + 1.0) * np.ones_like(na, dtype=float)
    bbdag[:, -1] = 0.0  # truncated b b^dag vanishes on the top level
    gam = params.kappa * na + gdn * nb + gup * bbdag
    return 1.0 - 0.5 * dt * gam


# ---------------------------------------------------------------------------
# moment contraction helpers


def _pair_weights(vecs: Sequence[np.ndarray]) -> np.ndarray:
    """Flat weights w such that sum_k w_k m_k = sum_i <(v_i . r)^2> for the
    given quadrature coefficient rows."""
    K = np.zeros((4, 4))
    for v in vecs:
        K += np.outer(v, v)
    w = np.empty(len(_PAIRS))
    for k, (i, j) in enumerate(_PAIRS):
        w[k] = K[i, j] * (2.0 if i != j else 1.0)
    return w


@lru_cache(maxsize=None)
def _polariton_weights(params: ModelParams, delta: float):
    _, S = williamson(quadrature_form(params, delta))
    return _pair_weights([S[0], S[1]]), _pair_weights([S[2], S[3]])


def _observables(params: ModelParams, mom: np.ndarray, deltas: np.ndarray):
    """n_a, n_b, N_A, N_B, <H> arrays of shape mom.shape[:-1] from recorded
    second moments at the recorded detunings."""
    m = mom
    n_a = 0.5 * (m[..., _PAIR_INDEX[(0, 0)]] + m[..., _PAIR_INDEX[(1, 1)]] - 1.0)
    n_b = 0.5 * (m[..., _PAIR_INDEX[(2, 2)]] + m[..., _PAIR_INDEX[(3, 3)]] - 1.0)
    xaxb = m[..., _PAIR_INDEX[(0, 2)]]
    energy = -deltas * n_a + params.omega_m * n_b + 2.0 * params.G * xaxb
    N_A = np.empty_like(n_a)
    N_B = np.empty_like(n_b)
    for k, d in enumerate(np.asarray(deltas)):
        wA, wB = _polariton_weights(params, float(d))
        # elementwise multiply + per-row sum: bitwise independent of the
        # batch shape, unlike a BLAS matmul
        N_A[..., k] = 0.5 * (m[..., k, :] * wA).sum(axis=-1) - 0.5
        N_B[..., k] = 0.5 * (m[..., k, :] * wB).sum(axis=-1) - 0.5
    return n_a, n_b, N_A, N_B, energy


# ---------------------------------------------------------------------------
# the driver


def _worker_threads() -> int | None:
    env = os.environ.get("OTTOMECH_WORKERS", "").strip()
    if not env:
        return None
    try:
        n = int(env)
    except ValueError as exc:
        raise ConfigurationError(f"OTTOMECH_WORKERS must be an integer, got {env!r}") from exc
    if n < 1:
        raise ConfigurationError("OTTOMECH_WORKERS must be >= 1")
    return n


def _draw_block(streams, n, scale):
    dws = np.empty((len(streams), n))
    jus = np.empty((len(streams), n))
    cus = np.empty((len(streams), n))
    for i, s in enumerate(streams):
        dws[i] = s.normals(n, scale)
        jus[i] = s.uniforms(n)
        cus[i] = s.uniforms(n)
    return dws, jus, cus


def _run_batch(config: CycleConfig, indices: Sequence[int], plans, prep):
    """Advance one batch of trajectories through the full cycle."""
    dims = config.dims
    B = len(indices)
    da, db = dims.n_photon, dims.n_phonon
    sq_a = np.sqrt(np.arange(da + 1.0))
    sq_b = np.sqrt(np.arange(db + 1.0))
    no_snap_steps = np.empty(0, dtype=np.int64)
    no_snaps = np.empty((B, 0, da, db), dtype=np.complex128)

    streams = [RNGStream(config.stepper.seed, int(i)) for i in indices]
    u0 = np.array([s.uniform() for s in streams])
    pmf, pol_states, pol_energies = prep
    if config.initial_phonon_fock is not None:
        ns = np.full(B, config.initial_phonon_fock, dtype=np.int64)
    else:
        ns = _fock_from_uniform(pmf, u0)
    psis = np.zeros((B, da, db), dtype=np.complex128)
    if config.initial_basis == "bare":
        for t in range(B):
            psis[t, 0, ns[t]] = 1.0
    else:
        for t in range(B):
            psis[t] = pol_states[ns[t]].reshape(da, db)

    works = np.zeros((B, 4))
    jumps = np.zeros(B, dtype=np.int64)
    series = {k: [] for k in ("t", "delta", "n_a", "N_A", "N_B")}
    u_bounds = np.zeros((B, 5))
    stroke_index = {p.stroke_no: i for i, p in enumerate(plans)}

    first = True
    for plan in plans:
        tables = _split_tables(config.params, dims, plan.dt, plan.delta_mid)
        pha, phb, vph, Wa, WaT, Wb, WbT = tables
        drift = (
            _drift_factor(config.params, dims, plan.dt)
            if plan.jumps_on
            else np.ones((da, db))
        )
        scheme = {
            "none": _kernel.SCHEME_NONE,
            "absorptive": _kernel.SCHEME_ABSORPTIVE,
            "dispersive": _kernel.SCHEME_DISPERSIVE,
        }[config.meas.scheme if plan.meas_on else "none"]
        lam = config.meas.lam if plan.meas_on else 0.0
        p = config.params
        mom = np.empty((B, len(plan.rec_steps), _kernel.N_MOMENTS))
        work_acc = np.zeros(B)
        status = np.zeros(B, dtype=np.int64)
        err_step = np.zeros(B, dtype=np.int64)
        sqrt_dt = np.sqrt(plan.dt)

        k0 = 0
        while k0 < plan.nsteps:
            k1 = min(k0 + _CHUNK_STEPS, plan.nsteps)
            n = k1 - k0
            dws, jus, cus = _draw_block(streams, n, sqrt_dt)
            in_chunk = (plan.rec_steps >= (k0 if k0 == 0 else k0 + 1)) & (
                plan.rec_steps <= k1
            )
            rec_local = (plan.rec_steps[in_chunk] - k0).astype(np.int64)
            mom_view = mom[:, in_chunk, :]
            mom_chunk = np.ascontiguousarray(mom_view)
            _kernel.run_stroke(
                psis,
                pha[k0:k1],
                phb,
                vph,
                Wa,
                WaT,
                Wb,
                WbT,
                sq_a,
                sq_b,
                1 if p.G != 0 else 0,
                scheme,
                lam,
                plan.dt,
                1 if plan.jumps_on else 0,
                p.kappa,
                p.gamma * (p.nbar_th + 1),
                p.gamma * p.nbar_th,
                drift,
                plan.dknots[k0 : k1 + 1],
                dws,
                jus,
                cus,
                1 if config.stepper.renorm_every_step else 0,
                rec_local,
                mom_chunk,
                no_snap_steps,
                no_snaps,
                work_acc,
                jumps,
                status,
                err_step,
            )
            mom[:, in_chunk, :] = mom_chunk
            bad = np.nonzero(status)[0]
            if bad.size:
                t = int(bad[0])
                reason = (
                    "norm collapse"
                    if status[t] == _kernel.STATUS_NORM_COLLAPSE
                    else "single-step jump probability above 0.1"
                )
                raise IntegratorError(
                    f"{reason} in stroke {plan.stroke_no} at step "
                    f"{k0 + int(err_step[t])} (trajectory {indices[t]}); "
                    f"reduce the time step"
                )
            k0 = k1

        works[:, plan.stroke_no - 1] += work_acc
        n_a, n_b, N_A, N_B, energy = _observables(p, mom, plan.rec_deltas)
        if first:
            u_bounds[:, 0] = energy[:, 0]
            sl = slice(None)
            first = False
        else:
            sl = slice(1, None)  # stroke boundary already recorded
        series["t"].append(np.broadcast_to(plan.rec_times[sl], n_a[:, sl].shape))
        series["delta"].append(np.broadcast_to(plan.rec_deltas[sl], n_a[:, sl].shape))
        series["n_a"].append(n_a[:, sl])
        series["N_A"].append(N_A[:, sl])
        series["N_B"].append(N_B[:, sl])
        u_bounds[:, plan.stroke_no] = energy[:, -1]

    if 2 not in stroke_index:
        u_bounds[:, 2] = u_bounds[:, 1]

    if config.stroke4_mode == "resample":
        u4 = np.array([s.uniform() for s in streams])
        if config.initial_phonon_fock is not None:
            ns4 = np.full(B, config.initial_phonon_fock, dtype=np.int64)
        else:
            ns4 = _fock_from_uniform(pmf, u4)
        if config.initial_basis == "bare":
            fresh_energy = config.params.omega_m * ns4.astype(float)
            for t in range(B):
                psis[t] = 0.0
                psis[t, 0, ns4[t]] = 1.0
        else:
            fresh_energy = pol_energies[ns4]
            for t in range(B):
                psis[t] = pol_states[ns4[t]].reshape(da, db)
        u_bounds[:, 4] = fresh_energy
    elif 4 not in stroke_index:
        u_bounds[:, 4] = u_bounds[:, 3]

    q_in = u_bounds[:, 4] - u_bounds[:, 3]
    records = []
    t_series = np.concatenate(series["t"], axis=1)
    d_series = np.concatenate(series["delta"], axis=1)
    na_series = np.concatenate(series["n_a"], axis=1)
    NA_series = np.concatenate(series["N_A"], axis=1)
    NB_series = np.concatenate(series["N_B"], axis=1)
    for t, idx in enumerate(indices):
        records.append(
            TrajectoryRecord(
                index=int(idx),
                traj_seed=int(idx),
                work=float(works[t, 0] + works[t, 2]),
                work_strokes=works[t].copy(),
                t=t_series[t].copy(),
                delta=d_series[t].copy(),
                n_a=na_series[t].copy(),
                N_A=NA_series[t].copy(),
                N_B=NB_series[t].copy(),
                jump_count=int(jumps[t]),
                u_bounds=u_bounds[t].copy(),
                q_in=float(q_in[t]),
            )
        )
    return records


def run_ensemble(
    config: CycleConfig, indices: Iterable[int] | None = None
) -> list[TrajectoryRecord]:
    """Run trajectories (all of 0..n_traj-1 by default) and return their
    records sorted by index.  Thread count comes from OTTOMECH_WORKERS and
    never changes the results."""
    config.validate()
    threads = _worker_threads()
    if threads is not None:
        import numba

        numba.set_num_threads(threads)
    idx = np.arange(config.n_traj) if indices is None else np.asarray(list(indices))
    plans = _build_plans(config)
    pmf = _thermal_pmf(config.params.nbar_th, config.dims.n_phonon)
    if config.initial_basis == "polariton":
        pol_states, pol_energies = _polariton_fock_table(
            config.params, config.params.delta_i, config.dims
        )
    else:
        pol_states, pol_energies = None, None
    records: list[TrajectoryRecord] = []
    for b0 in range(0, len(idx), config.batch_size):
        batch = idx[b0 : b0 + config.batch_size]
        records.extend(
            _run_batch(config, batch, plans, (pmf, pol_states, pol_energies))
        )
    records.sort(key=lambda r: r.index)
    return records


def run_trajectory(config: CycleConfig, index: int) -> TrajectoryRecord:
    """Single trajectory, bit-identical to its appearance in any ensemble."""
    return run_ensemble(config, indices=[index])[0]


# ---------------------------------------------------------------------------
# work / heat bookkeeping and statistics


def work_increment(state: QState, delta_step: float) -> float:
    """-<n_a> * delta_step, the work for one detuning increment (hbar = 1).

    Summed over a stroke with endpoint averaging this is the trapezoid
    approximation of W = -int <n_a> d(delta)."""
    n_a = number_op(state.dims, "photon")
    return float(-np.real(expectation(state, n_a)) * delta_step)


def heat_bookkeeping(records: Sequence[TrajectoryRecord]) -> float:
    """Ensemble-mean heat absorbed from the hot bath during stroke 4.

    The Hamiltonian is constant there, so dU = dQ; in resample mode the
    fresh-sample energy stands in for the fully rethermalized state."""
    if not records:
        raise ConfigurationError("no trajectory records")
    return float(np.mean([r.q_in for r in records]))


def ensemble_statistics(
    records: Sequence[TrajectoryRecord], bins: HistogramSpec | None = None
) -> CycleResult:
    """Reduce trajectory records to ensemble statistics.

    Mean and variance of the work use the population (divide-by-N) form;
    the histogram is of -W (positive = output) and sums to one."""
    if not records:
        raise ConfigurationError("no trajectory records")
    recs = sorted(records, key=lambda r: r.index)
    bins = bins or HistogramSpec()
    works = np.array([r.work for r in recs])
    n = len(works)
    mean = float(works.mean())
    var = float(works.var())  # ddof=0 per the population definition
    sem = float(np.sqrt(var / n))
    q_in = heat_bookkeeping(recs)
    warning = not q_in > 0
    eff = float(-mean / q_in) if q_in > 0 else float("nan")
    return CycleResult(
        mean_work=mean,
        sem_work=sem,
        var_work=var,
        hist_centers=bins.centers(),
        hist_probs=bins.probabilities(-works),
        q_in=q_in,
        efficiency=eff,
        q_in_warning=warning,
        n_traj_used=n,
        t=recs[0].t.copy(),
        delta=recs[0].delta.copy(),
        mean_n_a=np.mean([r.n_a for r in recs], axis=0),
        mean_N_A=np.mean([r.N_A for r in recs], axis=0),
        mean_N_B=np.mean([r.N_B for r in recs], axis=0),
    )


# ---------------------------------------------------------------------------
# fixed-detuning ensemble evolution (unraveling-consistency route)


def evolve_ensemble_fixed_delta(
    params: ModelParams,
    meas: MeasurementConfig,
    stepper: StepperConfig,
    dims: SpaceDims,
    delta: float,
    t_final: float,
    n_traj: int,
    snapshot_times: Sequence[float],
    initial_state: QState,
    dissipation: bool = True,
) -> np.ndarray:
    """Evolve an ensemble at fixed detuning through the production kernel
    and return state snapshots of shape (n_traj, n_snap, dim).

    Used to compare the trajectory average against the deterministic
    master equation; all trajectories start from the same pure state.
    """
    dt = stepper.dt
    nsteps = int(round(t_final / dt))
    snap_steps = np.array(sorted(int(round(ts / dt)) for ts in snapshot_times), dtype=np.int64)
    if snap_steps.size and (snap_steps[0] < 0 or snap_steps[-1] > nsteps):
        raise ConfigurationError("snapshot time outside [0, t_final]")
    da, db = dims.n_photon, dims.n_phonon
    delta_mid = np.full(nsteps, delta)
    pha, phb, vph, Wa, WaT, Wb, WbT = _split_tables(params, dims, dt, delta_mid)
    jumps_on = dissipation and (params.kappa > 0 or params.gamma > 0)
    drift = _drift_factor(params, dims, dt) if jumps_on else np.ones((da, db))
    scheme = {
        "none": _kernel.SCHEME_NONE,
        "absorptive": _kernel.SCHEME_ABSORPTIVE,
        "dispersive": _kernel.SCHEME_DISPERSIVE,
    }[meas.scheme if meas.active else "none"]
    sq_a = np.sqrt(np.arange(da + 1.0))
    sq_b = np.sqrt(np.arange(db + 1.0))
    psi0 = initial_state.vector.reshape(da, db)

    snaps = np.empty((n_traj, len(snap_steps), da, db), dtype=np.complex128)
    no_rec = np.empty(0, dtype=np.int64)
    threads = _worker_threads()
    if threads is not None:
        import numba

        numba.set_num_threads(threads)
    batch = 2048
    for b0 in range(0, n_traj, batch):
        b1 = min(b0 + batch, n_traj)
        B = b1 - b0
        streams = [RNGStream(stepper.seed, i) for i in range(b0, b1)]
        psis = np.tile(psi0, (B, 1, 1))
        mom = np.empty((B, 0, _kernel.N_MOMENTS))
        work = np.zeros(B)
        jumps = np.zeros(B, dtype=np.int64)
        status = np.zeros(B, dtype=np.int64)
        err_step = np.zeros(B, dtype=np.int64)
        snap_local = snaps[b0:b1]
        k0 = 0
        while k0 < nsteps:
            k1 = min(k0 + _CHUNK_STEPS, nsteps)
            dws, jus, cus = _draw_block(streams, k1 - k0, np.sqrt(dt))
            in_chunk = (snap_steps >= (k0 if k0 == 0 else k0 + 1)) & (snap_steps <= k1)
            sl = np.ascontiguousarray(snap_local[:, in_chunk])
            _kernel.run_stroke(
                psis, pha[k0:k1], phb, vph, Wa, WaT, Wb, WbT, sq_a, sq_b,
                1 if params.G != 0 else 0,
                scheme, meas.lam if meas.active else 0.0, dt,
                1 if jumps_on else 0,
                params.kappa, params.gamma * (params.nbar_th + 1),
                params.gamma * params.nbar_th, drift,
                np.full(k1 - k0 + 1, delta), dws, jus, cus,
                1 if stepper.renorm_every_step else 0,
                no_rec, mom,
                (snap_steps[in_chunk] - k0).astype(np.int64), sl,
                work, jumps, status, err_step,
            )
            snap_local[:, in_chunk] = sl
            if np.any(status):
                raise IntegratorError("integration failure in fixed-delta ensemble")
            k0 = k1
    return snaps.reshape(n_traj, len(snap_steps), dims.total)

"""Configuration files, experiment orchestration and CSV emission.

Config grammar: one ``key = value`` pair per line, ``#`` starts a comment,
keys are dotted section names (``model.G``, ``meas.lambda``, ...).  Unknown
keys are hard errors.  An empty file gives the full default configuration:
G = 0.2, delta_i = -3, delta_f = -0.4, kappa = 5e-3, gamma = 1e-4,
nbar_th = 4, no measurement, stroke times (40, 400, 40, 4e4), 20000
trajectories, dims (20, 20) -- all frequencies in units of omega_m, times
in 1/omega_m, energies in hbar*omega_m.

Verbs:
    run       one ensemble at the configured measurement point
    sweep     grid of measurement strengths x schemes
    validate  quick oracle/invariant suite
    dry-run   write the manifest and empty-but-headered CSVs

Exit codes: 0 success, 2 configuration error, 3 integrator error,
4 I/O error, 1 validation failure or unexpected exception.

The run manifest written next to the CSVs is itself a valid config file;
re-running with it reproduces every CSV byte for byte.  Worker threads are
taken from the OTTOMECH_WORKERS environment variable (they never change
the numbers, only the wall time).
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import replace

import numpy as np

from . import __version__
from .engine import (
    CycleConfig,
    CycleResult,
    HistogramSpec,
    ensemble_statistics,
    run_ensemble,
)
from .errors import ConfigurationError, IntegratorError, OttomechError
from .model import ModelParams, normal_mode_frequencies
from .qops import SpaceDims
from .traj import SCHEMES, MeasurementConfig, StepperConfig

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_INTEGRATOR = 3
EXIT_IO = 4

DEFAULT_SWEEP_LAMBDAS = (0.0, 0.01, 0.02, 0.04)
DEFAULT_SWEEP_SCHEMES = ("absorptive", "dispersive")


def _parse_bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_strokes(s: str) -> tuple:
    low = s.strip().lower()
    if low in ("", "none"):
        return ()
    return tuple(sorted(int(tok) for tok in low.split(",")))


def _parse_float_list(s: str) -> tuple:
    return tuple(float(tok) for tok in s.split(",") if tok.strip())


def _parse_scheme_list(s: str) -> tuple:
    out = tuple(tok.strip() for tok in s.split(",") if tok.strip())
    for tok in out:
        if tok not in SCHEMES:
            raise ValueError(f"unknown scheme {tok!r} (choose from {SCHEMES})")
    return out


def _parse_opt_int(s: str):
    return None if s.strip().lower() == "none" else int(s)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, tuple):
        return ",".join(_fmt(x) for x in v) if v else "none"
    if v is None:
        return "none"
    return str(v)


#: key -> (value parser, doc)
CONFIG_KEYS = {
    "model.G": (float, "linearized optomechanical coupling"),
    "model.delta_i": (float, "initial detuning (< -omega_m)"),
    "model.delta_f": (float, "final detuning (in (-omega_m, 0))"),
    "model.kappa": (float, "cavity damping rate"),
    "model.gamma": (float, "mechanical damping rate"),
    "model.nbar_th": (float, "thermal phonon occupation of the hot bath"),
    "dims.n_photon": (int, "photon Fock cutoff"),
    "dims.n_phonon": (int, "phonon Fock cutoff"),
    "meas.scheme": (str, "none | absorptive | dispersive"),
    "meas.lambda": (float, "measurement strength"),
    "stepper.dt": (float, "integration step for monitored/work strokes"),
    "stepper.dt_thermal": (float, "step for unmonitored thermalization strokes"),
    "stepper.seed": (int, "master seed (unsigned 64-bit)"),
    "stepper.renorm_every_step": (_parse_bool, "renormalize after each SSE step"),
    "cycle.t1": (float, "first adiabatic stroke duration"),
    "cycle.t2": (float, "cold thermalization duration"),
    "cycle.t3": (float, "second adiabatic stroke duration"),
    "cycle.t4": (float, "hot thermalization duration (evolve mode)"),
    "cycle.n_traj": (int, "trajectories per run"),
    "cycle.stroke4_mode": (str, "resample | evolve"),
    "cycle.schedule": (str, "linear | gap_adaptive"),
    "cycle.meas_strokes": (_parse_strokes, "strokes with the monitor on, e.g. 1,3"),
    "cycle.dissipation_strokes": (_parse_strokes, "strokes with the baths on"),
    "cycle.initial_basis": (str, "bare | polariton"),
    "cycle.initial_phonon_fock": (_parse_opt_int, "fixed initial Fock label or none"),
    "cycle.record_stride": (float, "time between recorded samples"),
    "cycle.batch_size": (int, "trajectories per kernel batch"),
    "hist.lo": (float, "histogram lower edge for -W"),
    "hist.hi": (float, "histogram upper edge for -W"),
    "hist.width": (float, "histogram bin width"),
    "sweep.lambdas": (_parse_float_list, "sweep verb: measurement strengths"),
    "sweep.schemes": (_parse_scheme_list, "sweep verb: schemes"),
}


def _default_values() -> dict:
    c = CycleConfig()
    return {
        "model.G": c.params.G,
        "model.delta_i": c.params.delta_i,
        "model.delta_f": c.params.delta_f,
        "model.kappa": c.params.kappa,
        "model.gamma": c.params.gamma,
        "model.nbar_th": c.params.nbar_th,
        "dims.n_photon": c.dims.n_photon,
        "dims.n_phonon": c.dims.n_phonon,
        "meas.scheme": c.meas.scheme,
        "meas.lambda": c.meas.lam,
        "stepper.dt": c.stepper.dt,
        "stepper.dt_thermal": c.stepper.dt_thermal,
        "stepper.seed": c.stepper.seed,
        "stepper.renorm_every_step": c.stepper.renorm_every_step,
        "cycle.t1": c.t1,
        "cycle.t2": c.t2,
        "cycle.t3": c.t3,
        "cycle.t4": c.t4,
        "cycle.n_traj": c.n_traj,
        "cycle.stroke4_mode": c.stroke4_mode,
        "cycle.schedule": c.schedule_kind,
        "cycle.meas_strokes": c.meas_strokes,
        "cycle.dissipation_strokes": c.dissipation_strokes,
        "cycle.initial_basis": c.initial_basis,
        "cycle.initial_phonon_fock": c.initial_phonon_fock,
        "cycle.record_stride": c.record_stride,
        "cycle.batch_size": c.batch_size,
        "hist.lo": c.hist.lo,
        "hist.hi": c.hist.hi,
        "hist.width": c.hist.width,
        "sweep.lambdas": DEFAULT_SWEEP_LAMBDAS,
        "sweep.schemes": DEFAULT_SWEEP_SCHEMES,
    }


def _apply_line(values: dict, line: str, where: str) -> None:
    text = line.split("#", 1)[0].strip()
    if not text:
        return
    if "=" not in text:
        raise ConfigurationError(f"{where}: expected 'key = value', got {line.strip()!r}")
    key, raw = (tok.strip() for tok in text.split("=", 1))
    if key not in CONFIG_KEYS:
        raise ConfigurationError(f"{where}: unknown key {key!r}")
    parser, _ = CONFIG_KEYS[key]
    try:
        values[key] = parser(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigurationError(f"{where}: bad value for {key}: {exc}") from exc


def _config_from_values(v: dict) -> CycleConfig:
    config = CycleConfig(
        params=ModelParams(
            G=v["model.G"],
            delta_i=v["model.delta_i"],
            delta_f=v["model.delta_f"],
            kappa=v["model.kappa"],
            gamma=v["model.gamma"],
            nbar_th=v["model.nbar_th"],
        ),
        meas=MeasurementConfig(scheme=v["meas.scheme"], lam=v["meas.lambda"]),
        stepper=StepperConfig(
            dt=v["stepper.dt"],
            seed=v["stepper.seed"],
            renorm_every_step=v["stepper.renorm_every_step"],
            dt_thermal=v["stepper.dt_thermal"],
        ),
        dims=SpaceDims(v["dims.n_photon"], v["dims.n_phonon"]),
        t1=v["cycle.t1"],
        t2=v["cycle.t2"],
        t3=v["cycle.t3"],
        t4=v["cycle.t4"],
        n_traj=v["cycle.n_traj"],
        stroke4_mode=v["cycle.stroke4_mode"],
        schedule_kind=v["cycle.schedule"],
        meas_strokes=v["cycle.meas_strokes"],
        dissipation_strokes=v["cycle.dissipation_strokes"],
        initial_basis=v["cycle.initial_basis"],
        initial_phonon_fock=v["cycle.initial_phonon_fock"],
        record_stride=v["cycle.record_stride"],
        hist=HistogramSpec(v["hist.lo"], v["hist.hi"], v["hist.width"]),
        batch_size=v["cycle.batch_size"],
    )
    config.validate()
    return config


def parse_config(
    path: str | None = None, overrides: list[str] | None = None
) -> tuple[CycleConfig, dict]:
    """Resolve a config file plus ``key=value`` override strings into a
    validated CycleConfig; returns (config, full resolved key dict)."""
    values = _default_values()
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                lines = fh.readlines()
        except OSError as exc:
            raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
        for lineno, line in enumerate(lines, start=1):
            _apply_line(values, line, f"{path}:{lineno}")
    for i, ov in enumerate(overrides or [], start=1):
        _apply_line(values, ov, f"--set #{i}")
    return _config_from_values(values), values


def manifest_text(values: dict, verb: str) -> str:
    """Fully resolved configuration in the config grammar, with provenance
    comments.  Parsing it back yields an identical CycleConfig."""
    lines = [
        f"# ottomech {__version__} run manifest",
        f"# verb: {verb}",
        f"# created: {time.strftime('%Y-%m-%dT%H:%M:%S%z')}",
    ]
    lines += [f"{key} = {_fmt(values[key])}" for key in sorted(values)]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# output files


SUMMARY_HEADER = "scheme,lambda,mean_work,sem_work,var_work,q_in,efficiency,n_traj"
POPULATIONS_HEADER = "scheme,lambda,t,delta,n_a,N_A,N_B"
WORK_HIST_HEADER = "scheme,lambda,bin_center,probability"
DISPERSION_HEADER = "delta,omega_A,omega_B,bare_photon,bare_phonon"


def _write(path: str, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _summary_row(scheme: str, lam: float, res: CycleResult) -> str:
    return ",".join(
        [
            scheme,
            _fmt(lam),
            _fmt(res.mean_work),
            _fmt(res.sem_work),
            _fmt(res.var_work),
            _fmt(res.q_in),
            _fmt(res.efficiency),
            str(res.n_traj_used),
        ]
    )


def _dispersion_rows(params: ModelParams, n: int = 401) -> list[str]:
    rows = []
    for d in np.linspace(params.delta_i, params.delta_f, n):
        wa, wb = normal_mode_frequencies(params, float(d))
        rows.append(
            ",".join(
                [_fmt(float(d)), _fmt(wa), _fmt(wb), _fmt(abs(float(d))), _fmt(params.omega_m)]
            )
        )
    return rows


def emit_outputs(
    outdir: str,
    values: dict,
    verb: str,
    points: list[tuple[str, float, CycleResult]],
) -> None:
    """Write manifest + the four CSVs (UTF-8, LF, '.' decimals).

    ``points`` may be empty (dry run): the CSVs then carry headers only.
    Histogram samples falling outside the configured range are clamped
    into the edge bins, so each run's probability column sums to one.
    """
    os.makedirs(outdir, exist_ok=True)
    probe = os.path.join(outdir, ".write_probe")
    with open(probe, "w") as fh:  # pre-flight writability check
        fh.write("ok")
    os.remove(probe)

    with open(os.path.join(outdir, "manifest.txt"), "w", encoding="utf-8", newline="") as fh:
        fh.write(manifest_text(values, verb))

    summary = [SUMMARY_HEADER]
    pops = [POPULATIONS_HEADER]
    hist = [WORK_HIST_HEADER]
    for scheme, lam, res in points:
        summary.append(_summary_row(scheme, lam, res))
        for k in range(len(res.t)):
            pops.append(
                ",".join(
                    [
                        scheme,
                        _fmt(lam),
                        _fmt(float(res.t[k])),
                        _fmt(float(res.delta[k])),
                        _fmt(float(res.mean_n_a[k])),
                        _fmt(float(res.mean_N_A[k])),
                        _fmt(float(res.mean_N_B[k])),
                    ]
                )
            )
        for c, p in zip(res.hist_centers, res.hist_probs):
            hist.append(",".join([scheme, _fmt(lam), _fmt(float(c)), _fmt(float(p))]))
    _write(os.path.join(outdir, "summary.csv"), summary)
    _write(os.path.join(outdir, "populations.csv"), pops)
    _write(os.path.join(outdir, "work_hist.csv"), hist)

    params = ModelParams(
        G=values["model.G"],
        delta_i=values["model.delta_i"],
        delta_f=values["model.delta_f"],
        kappa=values["model.kappa"],
        gamma=values["model.gamma"],
        nbar_th=values["model.nbar_th"],
    )
    disp = [DISPERSION_HEADER]
    if points or verb != "dry-run":
        disp += _dispersion_rows(params)
    _write(os.path.join(outdir, "dispersion.csv"), disp)


def _point_seed(master_seed: int, point_index: int) -> int:
    ss = np.random.SeedSequence(entropy=(int(master_seed), int(point_index)))
    return int(ss.generate_state(1, np.uint64)[0])


def run_sweep(
    config: CycleConfig,
    lambda_values,
    schemes,
    progress=None,
    sink: list | None = None,
) -> list[tuple[str, float, CycleResult]]:
    """Run the full ensemble at every (scheme, lambda) grid point with
    per-point derived seeds.

    Results are appended to ``sink`` (if given) as each point finishes, so
    a failing point aborts the sweep while preserving completed points.
    """
    for lam in lambda_values:
        if lam < 0:
            raise ConfigurationError(f"sweep lambda must be >= 0, got {lam}")
    points = sink if sink is not None else []
    k = 0
    for scheme in schemes:
        for lam in lambda_values:
            cfg = replace(
                config,
                meas=MeasurementConfig(scheme=scheme, lam=lam),
                stepper=replace(
                    config.stepper, seed=_point_seed(config.stepper.seed, k)
                ),
            )
            if progress:
                progress(f"sweep point {k + 1}: scheme={scheme} lambda={lam}")
            recs = run_ensemble(cfg)
            res = ensemble_statistics(recs, cfg.hist)
            points.append((scheme, lam, res))
            k += 1
    return points


# ---------------------------------------------------------------------------
# validate verb: quick oracle/invariant suite


def _validate_suite(log) -> bool:
    import numpy.linalg as la

    from .lindblad import (
        bath_collapse_ops,
        integrate_lindblad,
        measurement_collapse_op,
        trace_distance,
    )
    from .model import SYMPLECTIC_FORM, hamiltonian, quadrature_form, williamson
    from .qops import QState, number_op
    from .engine import evolve_ensemble_fixed_delta

    ok = True

    def check(name: str, passed: bool, detail: str = ""):
        nonlocal ok
        ok &= bool(passed)
        log(f"[{'PASS' if passed else 'FAIL'}] {name}" + (f"  ({detail})" if detail else ""))

    rng = np.random.default_rng(20260810)
    worst = 0.0
    for _ in range(20):
        wm = 1.0
        G = rng.uniform(0.02, 0.24)
        delta = -rng.uniform(max(1.05, 4 * G**2 / wm * 1.5 + 0.8), 4.0)
        p = ModelParams(G=G, delta_i=min(delta, -1.5) - 1e-6, delta_f=-0.9, nbar_th=0.0)
        wa, wb = normal_mode_frequencies(p, delta)
        ev = la.eigvals(SYMPLECTIC_FORM @ quadrature_form(p, delta))
        num = np.sort(np.abs(ev.imag))[::2]
        worst = max(worst, abs(wa - num.max()), abs(wb - num.min()))
    check("normal-mode formula vs dynamical-matrix oracle", worst < 1e-6, f"max |diff| = {worst:.2e}")

    p = ModelParams()
    dims = SpaceDims(8, 8)
    eps = 1e-6
    dH = (hamiltonian(p, -2.0 + eps, dims).matrix - hamiltonian(p, -2.0 - eps, dims).matrix) / (2 * eps)
    dev = np.max(np.abs(dH + number_op(dims, "photon").matrix))
    check("dH/d(delta) = -n_a", dev < 1e-8, f"max |diff| = {dev:.2e}")

    sdev = 0.0
    for d in (-3.0, -1.0, -0.5):
        _, S = williamson(quadrature_form(p, d))
        sdev = max(sdev, np.max(np.abs(S @ SYMPLECTIC_FORM @ S.T - SYMPLECTIC_FORM)))
    check("Bogoliubov matrices symplectic", sdev < 1e-10, f"max |S O S^T - O| = {sdev:.2e}")

    g = np.random.Generator(np.random.Philox(key=np.array([7, 1], dtype=np.uint64)))
    dws = g.normal(0, np.sqrt(1e-3), 10**6)
    zmean = abs(dws.mean()) / (np.sqrt(1e-3) / 1000)
    zvar = abs((dws**2).mean() - 1e-3) / (1e-3 * np.sqrt(2 / 1e6))
    check("Wiener increments: E[dw]=0, E[dw^2]=dt (4 sigma)", zmean < 4 and zvar < 4,
          f"z_mean={zmean:.2f}, z_var={zvar:.2f}")

    # small unraveling-consistency probe (the full check lives in the
    # acceptance suite at M=2000)
    small = SpaceDims(4, 4)
    pr = ModelParams(G=0.15, delta_i=-1.6, delta_f=-0.5, kappa=0.05, gamma=0.02, nbar_th=0.5)
    meas = MeasurementConfig("dispersive", 0.08)
    stepper = StepperConfig(dt=5e-3, seed=99)
    psi0 = QState.fock(small, 1, 1)
    T, M = 1.5, 400
    snaps = evolve_ensemble_fixed_delta(pr, meas, stepper, small, -1.2, T, M, [T], psi0)
    rho_traj = np.einsum("ti,tj->ij", snaps[:, 0], snaps[:, 0].conj()) / M
    H = hamiltonian(pr, -1.2, small).matrix
    collapse = bath_collapse_ops(pr, small) + measurement_collapse_op(meas, small)
    rho_det = integrate_lindblad(H, collapse, np.outer(psi0.vector, psi0.vector.conj()), T, 1e-3, [T])[0]
    dist = trace_distance(rho_traj, rho_det)
    tol = max(3 / np.sqrt(M), 5 * stepper.dt)
    check("trajectory ensemble vs Lindblad (quick probe)", dist < tol,
          f"trace distance {dist:.3f} < {tol:.3f}")
    return ok


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ottomech",
        description="Quantum-trajectory simulator of a monitored optomechanical Otto engine",
        epilog="Worker thread count: set OTTOMECH_WORKERS (results do not depend on it).",
    )
    ap.add_argument("--version", action="version", version=f"ottomech {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True)
    for verb, help_ in (
        ("run", "single ensemble run"),
        ("sweep", "measurement-strength sweep"),
        ("validate", "quick oracle/invariant suite"),
        ("dry-run", "emit manifest and empty CSVs"),
    ):
        sp = sub.add_parser(verb, help=help_)
        sp.add_argument("--config", metavar="PATH", help="config file (key = value lines)")
        sp.add_argument("--out", metavar="DIR", default="ottomech_out", help="output directory")
        sp.add_argument("--seed", type=int, help="override stepper.seed")
        sp.add_argument("--quick", action="store_true", help="2000-trajectory preset")
        sp.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="config override (repeatable)",
        )
    return ap


def _resolve(args) -> tuple[CycleConfig, dict]:
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"stepper.seed = {args.seed}")
    if args.quick:
        overrides.append("cycle.n_traj = 2000")
    return parse_config(args.config, overrides)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    log = lambda msg: print(msg, flush=True)  # noqa: E731
    try:
        if args.verb == "validate":
            config, values = _resolve(args)
            return EXIT_OK if _validate_suite(log) else EXIT_FAILURE

        config, values = _resolve(args)
        if args.verb == "dry-run":
            emit_outputs(args.out, values, "dry-run", [])
            log(f"wrote manifest and empty CSVs to {args.out}")
            return EXIT_OK
        if args.verb == "run":
            recs = run_ensemble(config)
            res = ensemble_statistics(recs, config.hist)
            emit_outputs(args.out, values, "run",
                         [(config.meas.scheme, config.meas.lam, res)])
            log(f"run complete: mean work = {res.mean_work:.4f} "
                f"+- {res.sem_work:.4f} hbar*omega_m -> {args.out}")
            return EXIT_OK
        if args.verb == "sweep":
            points: list[tuple[str, float, CycleResult]] = []
            try:
                run_sweep(config, values["sweep.lambdas"], values["sweep.schemes"],
                          progress=log, sink=points)
            finally:
                # preserve whatever finished if a point aborts the sweep
                emit_outputs(args.out, values, "sweep", points)
            log(f"sweep complete: {len(points)} points -> {args.out}")
            return EXIT_OK
        raise ConfigurationError(f"unknown verb {args.verb!r}")
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegratorError as exc:
        print(f"integrator error: {exc}", file=sys.stderr)
        return EXIT_INTEGRATOR
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OttomechError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())

"""Secondary acceptance: all four figure kinds render from CSVs produced
by an actual simulator CLI run, with the correct axis units, and the
histogram log panel carries the linear panel's bin masses."""

import shutil
import subprocess

import numpy as np
import pytest

from ottoplots import FigureSpec, build_figure, render

MICRO_SETS = [
    "dims.n_photon = 8",
    "dims.n_phonon = 14",
    "cycle.t1 = 2",
    "cycle.t2 = 2",
    "cycle.t3 = 2",
    "cycle.n_traj = 12",
    "cycle.batch_size = 8",
    "sweep.lambdas = 0,0.04",
    "sweep.schemes = absorptive,dispersive",
]


@pytest.fixture(scope="session")
def run_csvs(tmp_path_factory):
    if shutil.which("ottomech") is None:
        pytest.skip("simulator CLI not installed; provides the input CSVs")
    out = tmp_path_factory.mktemp("quickrun")
    args = ["ottomech", "sweep", "--out", str(out), "--seed", "7"]
    for s in MICRO_SETS:
        args += ["--set", s]
    res = subprocess.run(args, capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    return out


def test_all_kinds_render_from_run_output(run_csvs, tmp_path):
    kinds = {
        "dispersion": "dispersion.csv",
        "populations": "populations.csv",
        "work_vs_lambda": "summary.csv",
        "work_histogram": "work_hist.csv",
    }
    for kind, src in kinds.items():
        for ext in ("png", "svg"):
            out = tmp_path / f"{kind}.{ext}"
            render(FigureSpec(kind, (str(run_csvs / src),), str(out)))
            assert out.stat().st_size > 1000
        print(f"[PASS] secondary: {kind} renders from run CSVs")


def test_axis_units_from_run_output(run_csvs):
    fig = build_figure(
        FigureSpec("work_vs_lambda", (str(run_csvs / "summary.csv"),), "x.png")
    )
    assert r"\hbar\omega_m" in fig.axes[0].get_ylabel()
    assert r"\omega_m" in fig.axes[0].get_xlabel()
    fig = build_figure(
        FigureSpec("dispersion", (str(run_csvs / "dispersion.csv"),), "x.png")
    )
    assert r"\omega_m" in fig.axes[0].get_ylabel()
    print("[PASS] secondary: axis units in omega_m / hbar omega_m")


def test_log_panel_mass_equals_linear(run_csvs):
    fig = build_figure(
        FigureSpec("work_histogram", (str(run_csvs / "work_hist.csv"),), "x.png")
    )
    ax_lin, ax_log = fig.axes
    assert len(ax_lin.lines) >= 1
    for lin_line, log_line in zip(ax_lin.lines, ax_log.lines):
        lin_y = lin_line.get_ydata()
        keep = lin_y > 1e-12
        assert np.allclose(lin_line.get_xdata()[keep], log_line.get_xdata())
        assert np.allclose(lin_y[keep], log_line.get_ydata())
    print("[PASS] secondary: histogram log panel matches linear masses")

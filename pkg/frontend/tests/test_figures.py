import numpy as np
import pytest

from ottoplots import FigureSpec, PlotDataError, build_figure, render
from ottoplots.cli import main


def write_csv(path, header, rows):
    lines = [header] + [",".join(str(x) for x in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.fixture
def csvs(tmp_path):
    deltas = np.linspace(-3.0, -0.4, 21)
    disp = write_csv(
        tmp_path / "dispersion.csv",
        "delta,omega_A,omega_B,bare_photon,bare_phonon",
        [(d, abs(d) + 0.05, 1.0 - 0.02 * abs(d), abs(d), 1.0) for d in deltas],
    )
    rows = []
    for scheme, lam in (("none", 0.0), ("dispersive", 0.04), ("absorptive", 0.04)):
        for t in np.linspace(0, 40, 17):
            rows.append((scheme, lam, t, -3 + t / 20, 0.5, 0.02 + 0.01 * t, 4 - 0.02 * t))
    pops = write_csv(tmp_path / "populations.csv", "scheme,lambda,t,delta,n_a,N_A,N_B", rows)
    rows = []
    for scheme in ("dispersive", "absorptive"):
        for lam in (0.0, 0.01, 0.02, 0.04):
            rows.append((scheme, lam, -2.5 + 20 * lam, 0.05, 8.0 - 30 * lam, 3.0, 0.65, 2000))
    summ = write_csv(
        tmp_path / "summary.csv",
        "scheme,lambda,mean_work,sem_work,var_work,q_in,efficiency,n_traj",
        rows,
    )
    rows = []
    centers = np.arange(-0.95, 6.0, 0.1)
    for scheme, lam in (("none", 0.0), ("absorptive", 0.04)):
        probs = np.exp(-((centers - 2.7) ** 2) / (0.5 + 10 * lam))
        probs[::7] = 0.0  # zero-mass bins must not break the log panel
        probs /= probs.sum()
        rows += [(scheme, lam, c, p) for c, p in zip(centers, probs)]
    hist = write_csv(tmp_path / "work_hist.csv", "scheme,lambda,bin_center,probability", rows)
    return dict(dispersion=disp, populations=pops, summary=summ, hist=hist)


def test_all_kinds_render_png_and_svg(csvs, tmp_path):
    for kind, src in (
        ("dispersion", csvs["dispersion"]),
        ("populations", csvs["populations"]),
        ("work_vs_lambda", csvs["summary"]),
        ("work_histogram", csvs["hist"]),
    ):
        for ext in ("png", "svg"):
            out = tmp_path / f"{kind}.{ext}"
            path = render(FigureSpec(kind=kind, inputs=(src,), output=str(out)))
            data = out.read_bytes()
            assert path == str(out)
            assert len(data) > 1000


def test_rendering_is_deterministic(csvs, tmp_path):
    for ext in ("png", "svg"):
        a = tmp_path / f"a.{ext}"
        b = tmp_path / f"b.{ext}"
        render(FigureSpec("work_histogram", (csvs["hist"],), str(a)))
        render(FigureSpec("work_histogram", (csvs["hist"],), str(b)))
        assert a.read_bytes() == b.read_bytes()


def test_missing_column_names_column_and_file(csvs, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("scheme,lambda,t\nnone,0,0\n")
    with pytest.raises(PlotDataError, match="N_A"):
        build_figure(FigureSpec("populations", (str(bad),), str(tmp_path / "x.png")))
    with pytest.raises(PlotDataError, match="bad.csv"):
        build_figure(FigureSpec("populations", (str(bad),), str(tmp_path / "x.png")))


def test_single_bar_histogram(csvs, tmp_path):
    one = write_csv(
        tmp_path / "one.csv",
        "scheme,lambda,bin_center,probability",
        [("none", 0.0, 0.05, 1.0), ("none", 0.0, 0.15, 0.0)],
    )
    fig = build_figure(FigureSpec("work_histogram", (one,), str(tmp_path / "o.png")))
    render(FigureSpec("work_histogram", (one,), str(tmp_path / "o.png")))
    ax_lin, ax_log = fig.axes
    # log panel drops the zero-mass bin instead of erroring
    assert len(ax_log.lines[0].get_xdata()) == 1


def test_log_panel_matches_linear_masses(csvs):
    fig = build_figure(FigureSpec("work_histogram", (csvs["hist"],), "x.png"))
    ax_lin, ax_log = fig.axes
    for lin_line, log_line in zip(ax_lin.lines, ax_log.lines):
        lin_x, lin_y = lin_line.get_xdata(), lin_line.get_ydata()
        log_x, log_y = log_line.get_xdata(), log_line.get_ydata()
        keep = lin_y > 1e-12
        assert np.allclose(lin_x[keep], log_x)
        assert np.allclose(lin_y[keep], log_y)


def test_axis_units(csvs):
    fig = build_figure(FigureSpec("dispersion", (csvs["dispersion"],), "x.png"))
    assert r"\omega_m" in fig.axes[0].get_xlabel()
    assert r"\omega_m" in fig.axes[0].get_ylabel()
    fig = build_figure(FigureSpec("work_vs_lambda", (csvs["summary"],), "x.png"))
    assert r"\hbar\omega_m" in fig.axes[0].get_ylabel()
    fig = build_figure(FigureSpec("work_histogram", (csvs["hist"],), "x.png"))
    assert r"\hbar\omega_m" in fig.axes[1].get_xlabel()
    fig = build_figure(FigureSpec("populations", (csvs["populations"],), "x.png"))
    assert r"1/\omega_m" in fig.axes[0].get_xlabel()


def test_populations_marker_conventions(csvs):
    fig = build_figure(FigureSpec("populations", (csvs["populations"],), "x.png"))
    markers = {ln.get_marker() for ln in fig.axes[0].lines}
    assert {"s", "^", "o"} <= markers  # squares, triangles, circles


def test_cli_round_trip(csvs, tmp_path):
    out = tmp_path / "fig.png"
    rc = main(["--kind", "dispersion", "--in", csvs["dispersion"], "--out", str(out)])
    assert rc == 0 and out.exists()
    rc = main(["--kind", "dispersion", "--in", csvs["summary"], "--out", str(out)])
    assert rc == 2  # missing columns

def test_bad_spec_rejected(tmp_path):
    with pytest.raises(PlotDataError):
        FigureSpec("pie", ("a.csv",), "x.png")
    with pytest.raises(PlotDataError):
        FigureSpec("dispersion", ("a.csv",), "x.pdf")

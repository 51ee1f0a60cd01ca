"""The four figure kinds and their CSV readers.

Figures are built without pyplot (one Figure object per call, Agg canvas
attached at save time), so rendering is a pure function of the input CSV
bytes: the same inputs produce byte-identical PNG/SVG files.

Marker conventions for the populations overlay follow the source figures:
no measurement = black squares, dispersive = red triangles, absorptive =
blue circles.  All axes are labeled in mechanical-frequency units
(frequencies and rates in omega_m, energies in hbar omega_m, time in
1/omega_m).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import matplotlib
import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

matplotlib.rcParams["svg.hashsalt"] = "ottoplots"

FIGURE_KINDS = ("dispersion", "populations", "work_vs_lambda", "work_histogram")

STYLE = {
    "none": dict(color="black", marker="s", label="no measurement"),
    "dispersive": dict(color="tab:red", marker="^", label="dispersive"),
    "absorptive": dict(color="tab:blue", marker="o", label="absorptive"),
}


class PlotDataError(ValueError):
    """Missing column or malformed CSV input."""


@dataclass(frozen=True)
class FigureSpec:
    """What to render: one kind, its input CSVs, and the output path.

    ``log_floor`` only affects the work-histogram kind: bins with zero
    mass are dropped from the logarithmic panel instead of erroring.
    """

    kind: str
    inputs: tuple[str, ...]
    output: str
    log_floor: float = 1e-12

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise PlotDataError(f"figure kind must be one of {FIGURE_KINDS}, got {self.kind!r}")
        if not self.inputs:
            raise PlotDataError("at least one input CSV is required")
        if not (self.output.endswith(".png") or self.output.endswith(".svg")):
            raise PlotDataError("output must end in .png or .svg")


def read_columns(path: str, names: tuple[str, ...]) -> dict[str, np.ndarray]:
    """Read named columns; scheme stays text, everything else floats."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for name in names:
            if name not in header:
                raise PlotDataError(f"column {name!r} missing from {path} (found {header})")
        rows = list(reader)
    out = {}
    for name in names:
        if name == "scheme":
            out[name] = np.array([r[name] for r in rows])
        else:
            try:
                out[name] = np.array([float(r[name]) for r in rows])
            except ValueError as exc:
                raise PlotDataError(f"non-numeric value in column {name!r} of {path}: {exc}")
    return out


def _series_groups(data: dict[str, np.ndarray]):
    """Iterate (scheme, lambda, row mask) in first-appearance order."""
    seen = []
    keys = list(zip(data["scheme"], data["lambda"]))
    for key in keys:
        if key not in seen:
            seen.append(key)
    for scheme, lam in seen:
        mask = np.array([k == (scheme, lam) for k in keys])
        yield scheme, lam, mask


def _style_for(scheme: str, lam: float) -> dict:
    s = dict(STYLE.get(scheme, dict(color="gray", marker="x", label=scheme)))
    if scheme != "none" and lam == 0.0:
        s["label"] = f"{s['label']} (off)"
    elif scheme != "none":
        s["label"] = f"{s['label']}, strength {lam:g}"
    return s


def _fig_dispersion(spec: FigureSpec) -> Figure:
    d = read_columns(spec.inputs[0], ("delta", "omega_A", "omega_B", "bare_photon", "bare_phonon"))
    fig = Figure(figsize=(6.0, 4.2))
    ax = fig.add_subplot(111)
    ax.plot(d["delta"], d["omega_A"], color="tab:red", lw=1.8, label="upper polariton A")
    ax.plot(d["delta"], d["omega_B"], color="tab:blue", lw=1.8, label="lower polariton B")
    ax.plot(d["delta"], d["bare_photon"], "k--", lw=1.0, label="bare photon")
    ax.plot(d["delta"], d["bare_phonon"], "--", color="gray", lw=1.0, label="bare phonon")
    ax.set_xlabel(r"detuning $\Delta$ ($\omega_m$)")
    ax.set_ylabel(r"mode frequency ($\omega_m$)")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    return fig


def _fig_populations(spec: FigureSpec) -> Figure:
    d = read_columns(spec.inputs[0], ("scheme", "lambda", "t", "N_A", "N_B"))
    fig = Figure(figsize=(6.4, 4.2))
    ax = fig.add_subplot(111)
    for scheme, lam, mask in _series_groups(d):
        style = _style_for(scheme, lam)
        t = d["t"][mask]
        every = max(1, len(t) // 16)
        ax.plot(t, d["N_B"][mask], "-", color=style["color"], marker=style["marker"],
                markevery=every, ms=4, label=rf"$\bar N_B$: {style['label']}")
        ax.plot(t, d["N_A"][mask], "--", color=style["color"], marker=style["marker"],
                markevery=every, ms=4, mfc="none", label=rf"$\bar N_A$: {style['label']}")
    ax.set_xlabel(r"time ($1/\omega_m$)")
    ax.set_ylabel("mean polariton occupation")
    ax.legend(frameon=False, fontsize=7)
    fig.tight_layout()
    return fig


def _fig_work_vs_lambda(spec: FigureSpec) -> Figure:
    d = read_columns(spec.inputs[0], ("scheme", "lambda", "mean_work", "sem_work", "var_work"))
    fig = Figure(figsize=(8.4, 3.8))
    ax1 = fig.add_subplot(121)
    ax2 = fig.add_subplot(122)
    for scheme in dict.fromkeys(d["scheme"]):
        mask = d["scheme"] == scheme
        lam = d["lambda"][mask]
        order = np.argsort(lam)
        style = STYLE.get(scheme, dict(color="gray", marker="x", label=scheme))
        ax1.errorbar(lam[order], -d["mean_work"][mask][order],
                     yerr=d["sem_work"][mask][order], color=style["color"],
                     marker=style["marker"], ms=5, capsize=2, label=style["label"])
        ax2.plot(lam[order], d["var_work"][mask][order], color=style["color"],
                 marker=style["marker"], ms=5, label=style["label"])
    ax1.set_xlabel(r"measurement strength ($\omega_m$)")
    ax1.set_ylabel(r"$-\langle W\rangle$ ($\hbar\omega_m$)")
    ax2.set_xlabel(r"measurement strength ($\omega_m$)")
    ax2.set_ylabel(r"$\Delta W^2$ ($\hbar^2\omega_m^2$)")
    ax1.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    return fig


def _fig_work_histogram(spec: FigureSpec) -> Figure:
    d = read_columns(spec.inputs[0], ("scheme", "lambda", "bin_center", "probability"))
    groups = list(_series_groups(d))
    fig = Figure(figsize=(6.4, 5.6))
    ax_lin = fig.add_subplot(211)
    ax_log = fig.add_subplot(212)
    for scheme, lam, mask in groups:
        style = _style_for(scheme, lam)
        centers = d["bin_center"][mask]
        probs = d["probability"][mask]
        width = np.min(np.diff(np.sort(np.unique(centers)))) if len(centers) > 1 else 0.1
        ax_lin.step(centers, probs, where="mid", color=style["color"], lw=1.2,
                    label=style["label"])
        keep = probs > spec.log_floor  # log panel drops zero-mass bins
        ax_log.semilogy(centers[keep], probs[keep], drawstyle="steps-mid",
                        color=style["color"], lw=1.2, label=style["label"])
        ax_lin.set_xlim(centers.min() - width, centers.max() + width)
    for ax in (ax_lin, ax_log):
        ax.set_ylabel("probability")
        ax.legend(frameon=False, fontsize=8)
    ax_log.set_xlabel(r"output work $-W$ ($\hbar\omega_m$)")
    fig.tight_layout()
    return fig


_BUILDERS = {
    "dispersion": _fig_dispersion,
    "populations": _fig_populations,
    "work_vs_lambda": _fig_work_vs_lambda,
    "work_histogram": _fig_work_histogram,
}


def build_figure(spec: FigureSpec) -> Figure:
    """The figure object for a spec; pure function of the CSV contents."""
    return _BUILDERS[spec.kind](spec)


def render(spec: FigureSpec) -> str:
    """Render the figure to ``spec.output`` (PNG or SVG) and return the path."""
    fig = build_figure(spec)
    FigureCanvasAgg(fig)
    metadata = {"Date": None} if spec.output.endswith(".svg") else {"Software": "ottoplots"}
    fig.savefig(spec.output, dpi=150, metadata=metadata)
    return spec.output

"""Back-action of continuous photon-number monitoring on the first stroke.

The two probes disturb the engine in qualitatively different ways:
the absorptive scheme removes photons (the lower polariton population
simply decays), while the dispersive QND scheme conserves photon number
but dephases, scattering population into the upper polariton branch,
whose cycle runs in reverse and eats work.

Runs three small ensembles (no measurement / absorptive / dispersive at
strength 0.04) over the first stroke and prints the population transfer.
Expect a few minutes of runtime.
"""

from dataclasses import replace

import numpy as np

import ottomech as om
from ottomech.engine import CycleConfig, run_ensemble
from ottomech.traj import MeasurementConfig, StepperConfig

N_TRAJ = 300  # raise toward 2000 for smooth curves

base = CycleConfig(
    params=om.ModelParams(kappa=0.0, gamma=0.0),
    meas=MeasurementConfig("none", 0.0),
    stepper=StepperConfig(dt=5e-3, seed=42),
    dims=om.SpaceDims(20, 20),
    t1=40.0, t2=0.0, t3=1.0, t4=0.0,
    n_traj=N_TRAJ,
    schedule_kind="linear",
    meas_strokes=(1,),
    dissipation_strokes=(),
    initial_basis="polariton",
)

print(f"{'scheme':12s} {'N_B(0)':>7s} {'N_B(40)':>8s} {'N_A(40)':>8s} {'total(40)':>9s}")
rows = []
for scheme in ("none", "absorptive", "dispersive"):
    lam = 0.0 if scheme == "none" else 0.04
    recs = run_ensemble(replace(base, meas=MeasurementConfig(scheme, lam)))
    t = recs[0].t
    k = int(np.searchsorted(t, 40.0))
    NA = np.mean([r.N_A for r in recs], axis=0)
    NB = np.mean([r.N_B for r in recs], axis=0)
    na_ = np.mean([r.n_a for r in recs], axis=0)
    print(f"{scheme:12s} {NB[0]:7.3f} {NB[k]:8.3f} {NA[k]:8.3f} {NA[k] + NB[k]:9.3f}")
    for i in range(k + 1):
        rows.append(f"{scheme},{lam:g},{t[i]:.4f},{recs[0].delta[i]:.5f},"
                    f"{na_[i]:.5f},{NA[i]:.5f},{NB[i]:.5f}")

with open("populations.csv", "w", encoding="utf-8", newline="") as fh:
    fh.write("scheme,lambda,t,delta,n_a,N_A,N_B\n" + "\n".join(rows) + "\n")
print("\nwrote populations.csv")

try:
    from ottoplots import FigureSpec, render

    render(FigureSpec("populations", ("populations.csv",), "populations.png"))
    print("wrote populations.png")
except ImportError:
    print("install the frontend package (ottoplots) to render populations.png")

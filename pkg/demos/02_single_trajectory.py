"""Anatomy of one quantum trajectory through the full Otto cycle.

A single pure state is carried through sweep / cold hold / sweep back /
thermal resample while the photon-number record accumulates the work
integral W = -int <n_a> d(delta).  With the measurement off and a slow
enough (gap-adaptive) sweep, the lower-polariton occupation is an
adiabatic invariant and the work is just its energy change.
"""

import numpy as np

import ottomech as om
from ottomech.engine import CycleConfig, run_trajectory
from ottomech.traj import MeasurementConfig, StepperConfig

config = CycleConfig(
    params=om.ModelParams(kappa=5e-3, gamma=1e-4),
    meas=MeasurementConfig("none", 0.0),
    stepper=StepperConfig(dt=5e-3, seed=20260810),
    dims=om.SpaceDims(20, 20),
    t1=40.0, t2=400.0, t3=40.0, t4=4.0e4,
    n_traj=1,
    stroke4_mode="resample",
    initial_phonon_fock=4,
)

rec = run_trajectory(config, index=0)

print(f"work (strokes 1+3)  : {rec.work:+.4f} hbar*omega_m")
print(f"  stroke 1          : {rec.work_strokes[0]:+.4f}")
print(f"  stroke 3          : {rec.work_strokes[2]:+.4f}")
print(f"bath jumps          : {rec.jump_count}")
print(f"heat in (stroke 4)  : {rec.q_in:+.4f}")
print(f"<H> at boundaries   : {np.array2string(rec.u_bounds, precision=4)}")

k = np.searchsorted(rec.t, [0.0, 20.0, 40.0, 440.0, 480.0])
print("\n   t      delta   <n_a>    N_A     N_B")
for i in k:
    print(f"{rec.t[i]:7.1f}  {rec.delta[i]:6.2f}  {rec.n_a[i]:6.3f}  {rec.N_A[i]:6.3f}  {rec.N_B[i]:6.3f}")

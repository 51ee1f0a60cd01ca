"""Polariton dispersion: how the avoided crossing organizes the engine.

Sweeping the detuning from far red (delta << -omega_m) toward zero turns
the lower normal mode B from phonon-like into photon-like; the minimum
splitting ~ 2G at delta = -omega_m is where adiabaticity is hardest to
maintain.  This script prints the branch frequencies at the Otto-cycle
endpoints and writes dispersion.csv + a figure.
"""

import numpy as np

import ottomech as om

params = om.ModelParams(G=0.2, delta_i=-3.0, delta_f=-0.4)

for delta in (params.delta_i, -1.0, params.delta_f):
    wa, wb = om.normal_mode_frequencies(params, delta)
    print(f"delta = {delta:5.2f}: omega_A = {wa:.4f}, omega_B = {wb:.4f}  (units of omega_m)")

wa_i, wb_i = om.normal_mode_frequencies(params, params.delta_i)
wa_f, wb_f = om.normal_mode_frequencies(params, params.delta_f)
print(f"\nideal work per B quantum : {wb_f - wb_i:+.4f} hbar*omega_m")
print(f"ideal Otto efficiency    : {1 - wb_f / wb_i:.4f}")

# write the dispersion CSV and render it with the plotting package if present
rows = ["delta,omega_A,omega_B,bare_photon,bare_phonon"]
for d in np.linspace(params.delta_i, params.delta_f, 301):
    wa, wb = om.normal_mode_frequencies(params, float(d))
    rows.append(f"{d:.6f},{wa:.6f},{wb:.6f},{abs(d):.6f},{params.omega_m:.6f}")
with open("dispersion.csv", "w", encoding="utf-8", newline="") as fh:
    fh.write("\n".join(rows) + "\n")
print("\nwrote dispersion.csv")

try:
    from ottoplots import FigureSpec, render

    render(FigureSpec("dispersion", ("dispersion.csv",), "dispersion.png"))
    print("wrote dispersion.png")
except ImportError:
    print("install the frontend package (ottoplots) to render dispersion.png")

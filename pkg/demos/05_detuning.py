"""Unequal ring speeds make the whole pattern drift at the detuning speed."""
import numpy as np

from aptrings import Grid, initial_state, reference_params
from aptrings.diagnostics import drift_velocity
from aptrings.propagator import trajectory

p = reference_params()
R, v_ep = 21.0, 4.2
s0 = initial_state(Grid(128, R), "cos-cos")
times = np.linspace(0, 10, 41)

for dv in (0.0, 0.1, 0.2, 0.4):
    est = drift_velocity(trajectory(s0, times, v_ep + dv, v_ep - dv, p))
    print(f"dv = {dv:.2f} mm/s -> drift {est.speed:+.6f} mm/s (ring 1 {est.ring1:+.4f}, ring 2 {est.ring2:+.4f})")

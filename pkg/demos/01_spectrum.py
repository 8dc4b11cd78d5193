"""Eigenfrequencies of the fundamental ring mode as the rotation speed grows."""
import numpy as np

from aptrings import reference_params
from aptrings.spectrum import Phase, build_hamiltonian, eigenfrequencies, find_ep, sweep_spectrum

p = reference_params()
R = 21.0
kappa = 1 / R
print(f"h_c = {p.hc:.3f} 1/s, D = {p.D:.0f} mm^2/s")

# Below the exceptional point both modes sit still and decay at different rates.
rep = eigenfrequencies(build_hamiltonian(kappa, 0.0, p))
print("v = 0   :", rep.omega_plus, rep.omega_minus, rep.phase.value)

# Above it they share one decay rate and travel in opposite directions.
rep = eigenfrequencies(build_hamiltonian(kappa, 6.0, p))
print("v = 6   :", rep.omega_plus, rep.omega_minus, rep.phase.value)

v_ep = find_ep(kappa, p, (0.0, 10.0))
print(f"exceptional point at v = {v_ep:.6f} mm/s")

reports = sweep_spectrum(kappa, p, 0.0, 2 * v_ep, 21)
for r in reports[::4]:
    print(f"{r.v:6.2f}  Re {r.omega_plus.real:+.4f}  Im {r.omega_plus.imag:+.4f}  {r.phase.value}")
moving = [r.v for r in reports if r.phase is Phase.MOVING]
print("first moving sample:", np.round(moving[0], 3))

"""The stationary profile pair at the exceptional point and how well it closes on the ring."""
import numpy as np

from aptrings import reference_params
from aptrings import epform as E

p = reference_params()
sol = E.closed_form(p, 21.0)
print(f"eps = {sol.epsilon:.4f}, alpha = {sol.alpha:.6f}, phi = {sol.phi:.6f}")

x = np.linspace(0, 2 * np.pi * sol.R, 10_000)
print("f2 equation residual      :", E.f2_residual(x, sol))

# Both exponent conventions, each with the phase from the closed formula and from a root solve.
for variant in E.Variant:
    s = sol.with_variant(variant)
    root = E.phi_periodic(s)
    gap, slope = E.seam_gaps(s)
    print(f"{variant.value:15s} phi closed {s.phi:.6f}  phi root {root:.6f}  seam gap {gap:+.2e}  slope gap {slope:+.2e}")

"""Which ring radii give a spatially beating profile at the exceptional point."""
from aptrings import reference_params
from aptrings.epform import chi_squared, epsilon_window, radius_window, scan_epsilon_window
from aptrings.params import epsilon_of

p = reference_params()

print("eps window (closed form):", epsilon_window())
print("eps window (scan)       :", scan_epsilon_window(1e-5))

for n in (1, 2, 3):
    lo, hi = radius_window(p, n)
    print(f"n = {n}: {lo:.4f} mm < R < {hi:.4f} mm")

# At R = 21 mm the two admissible wavenumbers are chi2 = 1 and a slower chi1.
eps = epsilon_of(p, 21.0)
roots = chi_squared(eps, eps)
print(f"eps = {eps:.3f}, chi1 = {roots.chi1:.6f}, chi2 = {roots.chi2:.6f}")

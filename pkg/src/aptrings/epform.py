"""Closed-form analysis of the two-ring system at the exceptional point.

With z = n x / R and Delta T_i = exp(-lambda h_c t) f_i(z), the profiles obey

    f1'' - a f1' + f1 + eps f2 = 0
    f2'' + a f2' + f2 + eps f1 = 0

and eliminating f2 gives f1'''' + (2 - a^2) f1'' + (1 - eps^2) f1 = 0.  At the
exceptional point a = eps = h_c R^2 / (D n^2).

Two exponents for the homogeneous part of f2 are carried side by side, see
:class:`Variant`.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import optimize

from .errors import GridError, ParameterError, SingularityError
from .params import PhysicalParams, epsilon_of

EPS_WINDOW = (0.8, 1.0)


class Variant(str, enum.Enum):
    """Decay exponent of the homogeneous part of f2 in z-units.

    PAPER_LITERAL uses exp(-z / (2 eps)), i.e. exp(-D x / (2 R^3 h_c)) for n = 1.
    ODE_CONSISTENT uses exp(-eps z / 2), the real part of the characteristic
    roots of f2'' + eps f2' + f2 = 0.
    """

    PAPER_LITERAL = "PAPER_LITERAL"
    ODE_CONSISTENT = "ODE_CONSISTENT"


def decay_exponent(eps, variant):
    variant = Variant(variant)
    return 1.0 / (2.0 * eps) if variant is Variant.PAPER_LITERAL else eps / 2.0


# ---------------------------------------------------------------------------
# quartic in chi

@dataclass(frozen=True)
class QuarticRoots:
    a: float
    epsilon: float
    chi2_plus: complex | float
    chi2_minus: complex | float
    cond_i: bool
    cond_ii: bool

    @property
    def oscillatory(self):
        return self.cond_i and self.cond_ii

    @property
    def chi1(self):
        return math.sqrt(abs(self.chi2_plus)) if self.oscillatory else None

    @property
    def chi2(self):
        return math.sqrt(abs(self.chi2_minus)) if self.oscillatory else None


def oscillation_conditions(a, epsilon):
    """The two requirements for both roots chi^2 to be negative reals.

    (i)  a^4 - 4 a^2 + 4 eps^2 > 0
    (ii) a^2 - 2 + sqrt(a^4 - 4 a^2 + 4 eps^2) < 0
    """
    disc = a**4 - 4 * a**2 + 4 * epsilon**2
    cond_i = disc > 0
    cond_ii = cond_i and (a**2 - 2 + math.sqrt(disc) < 0)
    return cond_i, cond_ii


def chi_squared(a, epsilon) -> QuarticRoots:
    disc = a**4 - 4 * a**2 + 4 * epsilon**2
    sq = math.sqrt(disc) if disc >= 0 else cmath.sqrt(disc)
    plus = 0.5 * (a**2 - 2 + sq)
    minus = 0.5 * (a**2 - 2 - sq)
    cond_i, cond_ii = oscillation_conditions(a, epsilon)
    return QuarticRoots(a, epsilon, plus, minus, cond_i, cond_ii)


def quartic_residual(chi2, a, epsilon):
    return chi2**2 + (2 - a**2) * chi2 + (1 - epsilon**2)


def a_crit(epsilon):
    """2 (1 - sqrt(1 - eps^2)), defined for 0 <= eps <= 1."""
    if not 0.0 <= epsilon <= 1.0:
        raise ParameterError(f"a_crit needs 0 <= eps <= 1, got {epsilon!r}")
    return 2.0 * (1.0 - math.sqrt(1.0 - epsilon**2))


def in_epsilon_window(epsilon):
    """Unbroken-phase test at a = eps: 0 < eps < 1 and a < a_crit(eps), strict on both edges.

    The comparison is made on ``a`` itself, as the window is usually stated.
    Condition (i) alone bounds a^2 by a_crit instead, which is weaker; see
    :func:`oscillation_conditions` for the raw inequalities.
    """
    eps = np.asarray(epsilon, dtype=float)
    inside = (eps > 0) & (eps < 1)
    crit = 2.0 * (1.0 - np.sqrt(np.clip(1.0 - eps**2, 0.0, None)))
    result = inside & (eps < crit)
    return bool(result) if result.ndim == 0 else result


def epsilon_window():
    return EPS_WINDOW


def scan_epsilon_window(step=1e-6):
    """Brute-force the window by testing every eps on a uniform grid over [0, 1 + step].

    Each edge is reported as the midpoint between the last rejected and the
    first accepted sample, so it is resolved to step / 2.
    """
    grid = np.arange(0, int(round(1.0 / step)) + 2) * step
    inside = in_epsilon_window(grid)
    if not inside.any():
        raise ParameterError("no eps in (0, 1] satisfies the window conditions")
    idx = np.flatnonzero(inside)
    first, last = idx[0], idx[-1]
    return float(0.5 * (grid[first - 1] + grid[first])), float(0.5 * (grid[last] + grid[last + 1]))


def radius_window(p: PhysicalParams, n=1):
    """(R_lo, R_hi) with eps(R_lo, n) = 4/5 and eps(R_hi, n) = 1."""
    if n == 0:
        raise ParameterError("mode number must be nonzero")
    scale = abs(n) * math.sqrt(p.D / p.hc)
    return scale * math.sqrt(EPS_WINDOW[0]), scale * math.sqrt(EPS_WINDOW[1])


def periodicity_numbers(epsilon, R, p: PhysicalParams):
    """chi_{1,2} R sqrt(h_c/(D eps)) at a = eps; integer values mark periodic branches."""
    roots = chi_squared(epsilon, epsilon)
    scale = R * math.sqrt(p.hc / (p.D * epsilon))
    return math.sqrt(abs(roots.chi2_plus)) * scale, math.sqrt(abs(roots.chi2_minus)) * scale


# ---------------------------------------------------------------------------
# closed-form profiles

@dataclass(frozen=True)
class ClosedFormSolution:
    """Profile coefficients for the initial condition T1 = T2 = T0 + A cos(n x / R).

    ``phi`` is the phase actually used to evaluate f2; by default it is the
    value of :func:`phi_closed_form`.
    """

    epsilon: float
    lam: float
    alpha: float
    phi: float
    A: float
    B1: float
    A2: float
    n: int
    R: float
    variant: Variant

    @property
    def mu(self):
        """Decay exponent of the homogeneous part, in 1/mm."""
        return decay_exponent(self.epsilon, self.variant) * self.n / self.R

    def with_phi(self, phi):
        c = math.cos(phi)
        if abs(c) < 1e-12:
            raise SingularityError("sec(phi) is undefined at phi = +-pi/2")
        return replace(self, phi=float(phi), A2=self.A / c)

    def with_variant(self, variant):
        return replace(self, variant=Variant(variant))


def phi_closed_form(epsilon, alpha, n=1):
    """tan(phi) = cot(2 pi n alpha) - csc(2 pi n alpha) exp(pi n / eps), phi in (-pi/2, pi/2)."""
    arg = 2.0 * math.pi * n * alpha
    s = math.sin(arg)
    if abs(s) < 1e-12:
        raise SingularityError(f"sin(2 pi n alpha) vanishes (alpha = {alpha!r})")
    return math.atan(math.cos(arg) / s - math.exp(math.pi * n / epsilon) / s)


def closed_form(p: PhysicalParams, R, n=1, A=1.0, variant=Variant.ODE_CONSISTENT, phi=None):
    eps = epsilon_of(p, R, n)
    if not 0.0 < eps < 2.0:
        raise ParameterError(f"alpha = sqrt(1 - (eps/2)^2) needs 0 < eps < 2, got {eps!r}")
    alpha = math.sqrt(1.0 - (eps / 2.0) ** 2)
    n = abs(int(n))
    if phi is None:
        phi = phi_closed_form(eps, alpha, n)
    sol = ClosedFormSolution(
        epsilon=eps,
        lam=1.0 + 1.0 / eps,
        alpha=alpha,
        phi=0.0,
        A=float(A),
        B1=float(A),
        A2=float(A),
        n=n,
        R=float(R),
        variant=Variant(variant),
    )
    return sol.with_phi(phi)


def f1_profile(x, sol: ClosedFormSolution):
    return sol.B1 * np.cos(sol.n * np.asarray(x, dtype=float) / sol.R)


def f2_homogeneous(x, sol: ClosedFormSolution):
    z = sol.n * np.asarray(x, dtype=float) / sol.R
    mu = decay_exponent(sol.epsilon, sol.variant)
    return sol.A2 * np.exp(-mu * z) * np.cos(sol.alpha * z + sol.phi)


def f2_profile(x, sol: ClosedFormSolution):
    """A sec(phi) exp(-mu z) cos(alpha z + phi) - B1 sin(z) with z = n x / R."""
    if abs(math.cos(sol.phi)) < 1e-12:
        raise SingularityError("sec(phi) is undefined")
    z = sol.n * np.asarray(x, dtype=float) / sol.R
    return f2_homogeneous(x, sol) - sol.B1 * np.sin(z)


def seam_gaps(sol: ClosedFormSolution):
    """(value gap, derivative gap) of f2 between x = 0 and x = 2 pi R."""
    L = 2.0 * math.pi * sol.R
    z_end = 2.0 * math.pi * sol.n
    mu = decay_exponent(sol.epsilon, sol.variant)
    k = sol.n / sol.R

    def deriv(z):
        e = math.exp(-mu * z)
        hom = -sol.A2 * e * (mu * math.cos(sol.alpha * z + sol.phi) + sol.alpha * math.sin(sol.alpha * z + sol.phi))
        return k * (hom - sol.B1 * math.cos(z))

    value_gap = float(f2_profile(0.0, sol) - f2_profile(L, sol))
    return value_gap, deriv(0.0) - deriv(z_end)


def phi_periodic(sol: ClosedFormSolution):
    """Solve f2(0) = f2(2 pi R) for phi in (-pi/2, pi/2) with the active exponent.

    With A2 = A sec(phi) the gap is A [1 - e^{-2 pi n mu}(cos 2 pi n alpha - tan(phi) sin 2 pi n alpha)],
    monotone in tan(phi), so the root is bracketed by phi -> +-pi/2.
    """
    arg = 2.0 * math.pi * sol.n * sol.alpha
    if abs(math.sin(arg)) < 1e-12:
        raise SingularityError(f"sin(2 pi n alpha) vanishes (alpha = {sol.alpha!r})")

    def gap(phi):
        return seam_gaps(sol.with_phi(phi))[0] / sol.A

    edge = math.pi / 2 - 1e-12
    lo, hi = -edge, edge
    if gap(lo) * gap(hi) > 0:
        raise SingularityError("periodicity gap has no sign change in (-pi/2, pi/2)")
    return optimize.brentq(gap, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


# ---------------------------------------------------------------------------
# finite-difference residuals

@lru_cache(maxsize=None)
def central_weights(deriv, order):
    """Central finite-difference weights for the ``deriv``-th derivative, accuracy ``order``."""
    half = (deriv + order - 1) // 2
    offsets = range(-half, half + 1)
    size = 2 * half + 1
    # exact rational solve of the Vandermonde system sum_j w_j j^k = k! delta_{k,deriv}
    rows = [[Fraction(j) ** k for j in offsets] for k in range(size)]
    rhs = [Fraction(math.factorial(deriv)) if k == deriv else Fraction(0) for k in range(size)]
    for col in range(size):
        pivot = next(r for r in range(col, size) if rows[r][col] != 0)
        rows[col], rows[pivot] = rows[pivot], rows[col]
        rhs[col], rhs[pivot] = rhs[pivot], rhs[col]
        for r in range(size):
            if r != col and rows[r][col] != 0:
                factor = rows[r][col] / rows[col][col]
                rows[r] = [x - factor * y for x, y in zip(rows[r], rows[col])]
                rhs[r] -= factor * rhs[col]
    weights = [float(rhs[i] / rows[i][i]) for i in range(size)]
    return tuple(zip(offsets, weights))


def derivative(samples, dz, deriv, order=4):
    """Periodic central difference; values within the stencil half-width of the ends wrap."""
    f = np.asarray(samples, dtype=float)
    out = np.zeros_like(f)
    for offset, w in central_weights(deriv, order):
        if w:
            out += w * np.roll(f, -offset)
    return out / dz**deriv


def stencil_halfwidth(deriv, order=4):
    return (deriv + order - 1) // 2


@dataclass(frozen=True)
class CoupledResidual:
    r1: np.ndarray
    r2: np.ndarray
    scale1: float
    scale2: float
    mask: np.ndarray

    @property
    def linf1(self):
        return float(np.max(np.abs(self.r1[self.mask]), initial=0.0))

    @property
    def linf2(self):
        return float(np.max(np.abs(self.r2[self.mask]), initial=0.0))

    @property
    def relative(self):
        r1 = self.linf1 / self.scale1 if self.scale1 else self.linf1
        r2 = self.linf2 / self.scale2 if self.scale2 else self.linf2
        return r1, r2


def _interior_mask(n, periodic, halfwidth):
    mask = np.ones(n, dtype=bool)
    if not periodic:
        mask[:halfwidth] = False
        mask[n - halfwidth:] = False
    return mask


def coupled_residual(f1, f2, epsilon, a, dz, periodic=True, order=4):
    """Residuals of the coupled profile equations on a uniform grid of spacing ``dz``.

    With ``periodic=False`` the points whose stencil crosses the seam are
    excluded from the norms (the arrays still hold every point).
    """
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    if f1.shape != f2.shape or f1.ndim != 1:
        raise GridError("f1 and f2 must be 1-D arrays of equal length")
    if f1.size < 32:
        raise GridError(f"grid too coarse for residual evaluation: N = {f1.size} < 32")
    d1f1, d2f1 = derivative(f1, dz, 1, order), derivative(f1, dz, 2, order)
    d1f2, d2f2 = derivative(f2, dz, 1, order), derivative(f2, dz, 2, order)
    r1 = d2f1 - a * d1f1 + f1 + epsilon * f2
    r2 = d2f2 + a * d1f2 + f2 + epsilon * f1
    mask = _interior_mask(f1.size, periodic, stencil_halfwidth(2, order))
    terms1 = (d2f1, a * d1f1, f1, epsilon * f2)
    terms2 = (d2f2, a * d1f2, f2, epsilon * f1)
    scale1 = max(float(np.max(np.abs(t[mask]))) for t in terms1)
    scale2 = max(float(np.max(np.abs(t[mask]))) for t in terms2)
    return CoupledResidual(r1, r2, scale1, scale2, mask)


def fourth_order_residual(f1, epsilon, a, dz, periodic=True, order=8):
    """Relative L-infinity residual of f1'''' + (2 - a^2) f1'' + (1 - eps^2) f1.

    Fourth derivatives lose ~1/dz^4 to rounding, so a higher-order stencil on a
    moderate grid is used instead of a fine one.
    """
    f1 = np.asarray(f1, dtype=float)
    if f1.size < 32:
        raise GridError(f"grid too coarse for residual evaluation: N = {f1.size} < 32")
    d4 = derivative(f1, dz, 4, order)
    d2 = derivative(f1, dz, 2, order)
    terms = (d4, (2 - a**2) * d2, (1 - epsilon**2) * f1)
    r = sum(terms)
    mask = _interior_mask(f1.size, periodic, stencil_halfwidth(4, order))
    scale = max(float(np.max(np.abs(t[mask]))) for t in terms)
    return float(np.max(np.abs(r[mask]))) / scale


def f2_residual(x, sol: ClosedFormSolution, order=4):
    """Relative residual of f2'' + eps f2' + f2 + eps B1 cos z on samples ``x`` (uniform, mm).

    The grid is treated as open: points within the stencil of either end are skipped.
    """
    x = np.asarray(x, dtype=float)
    if x.size < 32:
        raise GridError(f"grid too coarse for residual evaluation: N = {x.size} < 32")
    z = sol.n * x / sol.R
    dz = z[1] - z[0]
    f2 = f2_profile(x, sol)
    d1 = derivative(f2, dz, 1, order)
    d2 = derivative(f2, dz, 2, order)
    forcing = sol.epsilon * sol.B1 * np.cos(z)
    terms = (d2, sol.epsilon * d1, f2, forcing)
    r = sum(terms)
    h = stencil_halfwidth(2, order)
    sl = slice(h, x.size - h)
    scale = max(float(np.max(np.abs(t[sl]))) for t in terms)
    return float(np.max(np.abs(r[sl]))) / scale


def profile_pair_on_ring(sol: ClosedFormSolution, points=1024):
    """Sample (x, f1, f2) on [0, 2 pi R) with ``points`` uniform samples."""
    x = np.arange(points) * (2.0 * math.pi * sol.R / points)
    return x, f1_profile(x, sol), f2_profile(x, sol)

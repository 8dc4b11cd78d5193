"""Per-mode 2x2 anti-PT Hamiltonian, its eigenfrequencies, and the exceptional point.

Convention: fields vary as exp(i(kappa x - omega t)), so Im(omega) < 0 means decay.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from ._csv import write_rows
from .errors import ParameterError, SearchError
from .params import PhysicalParams

#: |h_c^2 - kappa^2 v^2| <= EP_RTOL * h_c^2 is tagged EXCEPTIONAL.
EP_RTOL = 1e-10

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])


class Phase(str, enum.Enum):
    STATIC = "STATIC"
    EXCEPTIONAL = "EXCEPTIONAL"
    MOVING = "MOVING"


@dataclass(frozen=True)
class ModeHamiltonian:
    entries: np.ndarray
    kappa: float
    v: float
    hc: float
    D: float

    @property
    def gamma(self):
        """Mean decay rate kappa^2 D + h_c."""
        return self.kappa**2 * self.D + self.hc

    def modal_part(self):
        """M = H + i*gamma*Id; nilpotent exactly at the exceptional point."""
        return self.entries + 1j * self.gamma * np.eye(2)

    def apt_residual(self):
        """Frobenius norm of (sigma_x H sigma_x)^* + H, zero for an anti-PT matrix."""
        return float(np.linalg.norm(np.conj(SIGMA_X @ self.entries @ SIGMA_X) + self.entries))


def build_hamiltonian(kappa, v, p: PhysicalParams) -> ModeHamiltonian:
    hc, D = p.hc, p.D
    gamma = kappa**2 * D + hc
    H = np.array(
        [
            [-1j * gamma + kappa * v, 1j * hc],
            [1j * hc, -1j * gamma - kappa * v],
        ],
        dtype=complex,
    )
    return ModeHamiltonian(entries=H, kappa=float(kappa), v=float(v), hc=hc, D=D)


def discriminant(hc, kappa, v):
    return hc**2 - (kappa * v) ** 2


def classify(disc, hc, rtol=EP_RTOL):
    if abs(disc) <= rtol * hc**2:
        return Phase.EXCEPTIONAL
    return Phase.STATIC if disc > 0 else Phase.MOVING


def _unit_eigvec(kv, hc, s):
    # (M - s) u = 0 for M = [[kv, i hc], [i hc, -kv]]; two candidate forms, keep the better scaled.
    u1 = np.array([1j * hc, s - kv], dtype=complex)
    u2 = np.array([s + kv, 1j * hc], dtype=complex)
    u = u1 if np.linalg.norm(u1) >= np.linalg.norm(u2) else u2
    norm = np.linalg.norm(u)
    if norm == 0.0:
        return np.array([1.0, 0.0], dtype=complex)
    return u / norm


def principal_angle(u, w):
    """Angle in [0, pi/2] between the complex lines spanned by unit vectors u and w."""
    overlap = np.vdot(u, w)
    residual = np.linalg.norm(w - overlap * u)
    return float(math.atan2(residual, abs(overlap)))


@dataclass(frozen=True)
class EigenReport:
    kappa: float
    v: float
    omega_plus: complex
    omega_minus: complex
    eigvecs: np.ndarray  # columns: eigenvector of omega_plus, of omega_minus
    discriminant: float
    phase: Phase

    @property
    def coalescence_angle(self):
        return principal_angle(self.eigvecs[:, 0], self.eigvecs[:, 1])

    def row(self):
        return (
            self.v,
            self.omega_plus.real,
            self.omega_plus.imag,
            self.omega_minus.real,
            self.omega_minus.imag,
            self.phase.value,
        )


def eigenfrequencies(H: ModeHamiltonian, rtol=EP_RTOL) -> EigenReport:
    """Closed-form omega_pm = -i[(kappa^2 D + h_c) +- sqrt(h_c^2 - kappa^2 v^2)]."""
    hc, kv = H.hc, H.kappa * H.v
    disc = discriminant(hc, H.kappa, H.v)
    root = math.sqrt(disc) if disc >= 0 else 1j * math.sqrt(-disc)
    gamma = H.gamma
    omega_plus = complex(-1j * (gamma + root))
    omega_minus = complex(-1j * (gamma - root))
    # eigenvalues of the traceless part: omega = -i*gamma + s
    s_plus, s_minus = -1j * root, 1j * root
    vecs = np.column_stack([_unit_eigvec(kv, hc, s_plus), _unit_eigvec(kv, hc, s_minus)])
    return EigenReport(
        kappa=H.kappa,
        v=H.v,
        omega_plus=omega_plus,
        omega_minus=omega_minus,
        eigvecs=vecs,
        discriminant=disc,
        phase=classify(disc, hc, rtol),
    )


def eigenfrequencies_direct(H: ModeHamiltonian):
    """Roots of the characteristic polynomial, ordered like (omega_plus, omega_minus)."""
    tr = np.trace(H.entries)
    det = np.linalg.det(H.entries)
    sq = cmath.sqrt(tr * tr / 4 - det)
    a, b = tr / 2 + sq, tr / 2 - sq
    # omega_plus has the more negative imaginary part, ties broken by larger real part
    return (a, b) if (a.imag, -a.real) <= (b.imag, -b.real) else (b, a)


def find_ep(kappa, p: PhysicalParams, v_bracket):
    """Locate the EP speed by bisection on the discriminant inside ``v_bracket``."""
    if kappa == 0:
        raise ParameterError("the uniform mode has no exceptional point")
    lo, hi = (float(x) for x in v_bracket)
    hc = p.hc

    def f(v):
        return (hc**2 - (kappa * v) ** 2) / hc**2

    flo, fhi = f(lo), f(hi)
    if lo == hi or flo * fhi > 0:
        raise SearchError(f"discriminant does not change sign on [{lo}, {hi}]")
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    return optimize.bisect(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=400)


def sweep_spectrum(kappa, p: PhysicalParams, v_min, v_max, steps):
    if int(steps) != steps or steps < 2:
        raise ParameterError(f"steps must be an integer >= 2, got {steps!r}")
    grid = np.linspace(v_min, v_max, int(steps))
    return [eigenfrequencies(build_hamiltonian(kappa, v, p)) for v in grid]


SPECTRUM_COLUMNS = (
    "v_mm_per_s",
    "re_omega_plus",
    "im_omega_plus",
    "re_omega_minus",
    "im_omega_minus",
    "phase",
)


def spectrum_csv(reports, comments=()):
    return write_rows(SPECTRUM_COLUMNS, (r.row() for r in reports), comments)

"""Exact time evolution of the coupled ring equations, one Fourier mode at a time.

Ring 1 is advected at +v1 and ring 2 at -v2, so that

    dT1/dt = D T1'' - v1 T1' + h_c (T2 - T1)
    dT2/dt = D T2'' + v2 T2' + h_c (T1 - T2)

and v1 = v2 = v is the symmetric counter-rotating case.  For a mode
exp(i kappa x) the amplitudes obey d(a1, a2)/dt = -i H (a1, a2) with

    H = [[-i(kappa^2 D + h_c) + kappa v1, i h_c],
         [i h_c, -i(kappa^2 D + h_c) - kappa v2]].
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridError, ParameterError
from .fields import FieldState, Grid
from .params import PhysicalParams, RingGeometry

#: Jordan path when |h_c^2 - kappa^2 vbar^2| <= JORDAN_RTOL * h_c^2.
JORDAN_RTOL = 1e-8


@dataclass(frozen=True)
class ModeAmplitude:
    a1: complex
    a2: complex

    def vector(self):
        return np.array([self.a1, self.a2], dtype=complex)


@dataclass(frozen=True)
class FieldSpectrum:
    """Fourier coefficients c_n with T(x) = sum_n c_n exp(i n x / R), modes in FFT order."""

    modes: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    grid: Grid
    time: float
    T0: float = 0.0

    def amplitude(self, n):
        idx = _mode_index(self.grid.N, n)
        return ModeAmplitude(complex(self.a1[idx]), complex(self.a2[idx]))


def _mode_index(N, n):
    if not -(N // 2) <= n < N - N // 2:
        raise GridError(f"mode {n} not resolved on N = {N}")
    return n % N


def decompose(field: FieldState) -> FieldSpectrum:
    N = field.grid.N
    modes = np.rint(np.fft.fftfreq(N, d=1.0 / N)).astype(int)
    return FieldSpectrum(
        modes=modes,
        a1=np.fft.fft(field.T1) / N,
        a2=np.fft.fft(field.T2) / N,
        grid=field.grid,
        time=field.time,
        T0=field.T0,
    )


def compose_complex(spec: FieldSpectrum):
    N = spec.grid.N
    return np.fft.ifft(spec.a1 * N), np.fft.ifft(spec.a2 * N)


def compose(spec: FieldSpectrum) -> FieldState:
    z1, z2 = compose_complex(spec)
    return FieldState(spec.grid, z1.real, z2.real, spec.time, spec.T0)


def mode_generator(kappa, v1, v2, D, hc):
    """G = -i H, so that da/dt = G a."""
    gamma = kappa**2 * D + hc
    return np.array(
        [
            [-gamma - 1j * kappa * v1, hc],
            [hc, -gamma + 1j * kappa * v2],
        ],
        dtype=complex,
    )


def is_defective(kappa, v1, v2, hc, rtol=JORDAN_RTOL):
    vbar = 0.5 * (v1 + v2)
    return abs(hc**2 - (kappa * vbar) ** 2) <= rtol * hc**2


def _eigvec(b11, b12, b21, s):
    # (B - s) u = 0 for B = [[b11, b12], [b21, -b11]]
    u1 = np.array([b12, s - b11], dtype=complex)
    u2 = np.array([s + b11, b21], dtype=complex)
    return u1 if np.linalg.norm(u1) >= np.linalg.norm(u2) else u2


def mode_propagator(kappa, v1, v2, D, hc, dt, rtol=JORDAN_RTOL, force=None):
    """exp(G dt) for one mode.

    ``force`` may be "jordan" or "diagonal" to pin the branch; by default the
    Jordan form exp(mu dt)(Id + B dt) is used within ``rtol`` of the
    exceptional point and an eigen-decomposition elsewhere.
    """
    if dt < 0:
        raise ParameterError(f"dt must be non-negative, got {dt!r}")
    if dt == 0:
        return np.eye(2, dtype=complex)
    G = mode_generator(kappa, v1, v2, D, hc)
    mu = 0.5 * (G[0, 0] + G[1, 1])
    B = G - mu * np.eye(2)
    branch = force or ("jordan" if is_defective(kappa, v1, v2, hc, rtol) else "diagonal")
    if branch == "jordan":
        return np.exp(mu * dt) * (np.eye(2) + B * dt)
    if branch != "diagonal":
        raise ParameterError(f"unknown branch {branch!r}")
    b11, b12, b21 = B[0, 0], B[0, 1], B[1, 0]
    s = np.sqrt(b11 * b11 + b12 * b21 + 0j)
    V = np.column_stack([_eigvec(b11, b12, b21, s), _eigvec(b11, b12, b21, -s)])
    return V @ np.diag(np.exp((mu + np.array([s, -s])) * dt)) @ np.linalg.inv(V)


def evolve_mode(amp: ModeAmplitude, n, v1, v2, p: PhysicalParams, geometry: RingGeometry, dt):
    kappa = n / geometry.R
    out = mode_propagator(kappa, v1, v2, p.D, p.hc, dt) @ amp.vector()
    return ModeAmplitude(complex(out[0]), complex(out[1]))


def evolve_spectrum(spec: FieldSpectrum, t_end, v1, v2, p: PhysicalParams) -> FieldSpectrum:
    dt = t_end - spec.time
    if dt < 0:
        raise ParameterError(f"t_end = {t_end} precedes the field time {spec.time}")
    N, R = spec.grid.N, spec.grid.R
    a1 = np.empty_like(spec.a1)
    a2 = np.empty_like(spec.a2)
    for idx, n in enumerate(spec.modes):
        kappa = n / R
        if N % 2 == 0 and n == -(N // 2):
            # Nyquist mode: +-kappa alias to the same samples, keep it real by dropping advection
            P = mode_propagator(kappa, 0.0, 0.0, p.D, p.hc, dt)
        else:
            P = mode_propagator(kappa, v1, v2, p.D, p.hc, dt)
        a1[idx] = P[0, 0] * spec.a1[idx] + P[0, 1] * spec.a2[idx]
        a2[idx] = P[1, 0] * spec.a1[idx] + P[1, 1] * spec.a2[idx]
    return FieldSpectrum(spec.modes, a1, a2, spec.grid, float(t_end), spec.T0)


def evolve(field: FieldState, t_end, v1, v2, p: PhysicalParams) -> FieldState:
    """Evolve to ``t_end`` with no time-step error; v1 = v2 = v is the symmetric case."""
    if t_end == field.time:
        return field
    return compose(evolve_spectrum(decompose(field), t_end, v1, v2, p))


def trajectory(field: FieldState, times, v1, v2, p: PhysicalParams):
    """Snapshots at each of ``times`` (each evolved from ``field`` directly)."""
    spec = decompose(field)
    return [compose(evolve_spectrum(spec, t, v1, v2, p)) for t in times]


def ep_secular_solution(grid: Grid, t, p: PhysicalParams, A=1.0):
    """Closed-form EP evolution of T1 = T2 = A cos(x/R) for n = 1, v = h_c R.

    T1 = A e^{-gamma t}[cos + h_c t (cos + sin)], T2 = A e^{-gamma t}[cos + h_c t (cos - sin)].
    """
    theta = grid.x / grid.R
    hc = p.hc
    gamma = p.D / grid.R**2 + hc
    env = A * math.exp(-gamma * t)
    c, s = np.cos(theta), np.sin(theta)
    return FieldState(grid, env * (c + hc * t * (c + s)), env * (c + hc * t * (c - s)), t)

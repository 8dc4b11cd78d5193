"""Finite-difference reference solver for the coupled ring equations.

Second-order central differences on the periodic grid, classical RK4 in time.
Same sign convention as :mod:`aptrings.propagator`: ring 1 is advected at +v1,
ring 2 at -v2.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import sparse

from .errors import GridError, ParameterError, StabilityError
from .fields import FieldState
from .params import PhysicalParams

MIN_POINTS = 16
SAFETY = 0.4
GROWTH_LIMIT = 10.0


def _check_grid(state: FieldState):
    if state.grid.N < MIN_POINTS:
        raise GridError(f"finite-difference grid needs N >= {MIN_POINTS}, got {state.grid.N}")


def _rhs_array(U, dx, v1, v2, D, hc):
    Up = np.roll(U, -1, axis=1)
    Um = np.roll(U, 1, axis=1)
    lap = (Up - 2.0 * U + Um) / dx**2
    grad = (Up - Um) / (2.0 * dx)
    out = D * lap + hc * (U[::-1] - U)
    out[0] -= v1 * grad[0]
    out[1] += v2 * grad[1]
    return out


def rhs(state: FieldState, v1, v2, p: PhysicalParams):
    """(dT1/dt, dT2/dt) from the semi-discrete equations."""
    _check_grid(state)
    out = _rhs_array(state.stacked(), state.grid.dx, v1, v2, p.D, p.hc)
    return out[0], out[1]


def operator(N, dx, v1, v2, p: PhysicalParams):
    """Sparse 2N x 2N matrix of the semi-discrete system acting on concat(T1, T2)."""
    D, hc = p.D, p.hc
    idx = np.arange(N)
    plus, minus = (idx + 1) % N, (idx - 1) % N
    rows, cols, vals = [], [], []
    for ring, adv in ((0, -v1), (1, v2)):
        off = ring * N
        for c, w in (
            (idx, -2.0 * D / dx**2 - hc),
            (plus, D / dx**2 + adv / (2.0 * dx)),
            (minus, D / dx**2 - adv / (2.0 * dx)),
        ):
            rows.append(off + idx)
            cols.append(off + c)
            vals.append(np.full(N, w))
        rows.append(off + idx)
        cols.append((1 - ring) * N + idx)
        vals.append(np.full(N, hc))
    L = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(2 * N, 2 * N)
    )
    return L.tocsr()


def _rk4(L, u, dt):
    k1 = L @ u
    k2 = L @ (u + (0.5 * dt) * k1)
    k3 = L @ (u + (0.5 * dt) * k2)
    k4 = L @ (u + dt * k3)
    return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _guard(before, u_new):
    after = np.max(np.abs(u_new))
    if not np.isfinite(after) or (before > 0 and after > GROWTH_LIMIT * before):
        raise StabilityError(
            f"max |T| grew from {before:.3e} to {after:.3e} in one step; reduce dt"
        )
    return after


def step_rk4(state: FieldState, dt, v1, v2, p: PhysicalParams) -> FieldState:
    _check_grid(state)
    if dt < 0:
        raise ParameterError(f"dt must be non-negative, got {dt!r}")
    if dt == 0:
        return state
    N = state.grid.N
    u = np.concatenate([state.T1, state.T2])
    u_new = _rk4(operator(N, state.grid.dx, v1, v2, p), u, dt)
    _guard(np.max(np.abs(u)), u_new)
    return state.evolved(u_new[:N], u_new[N:], state.time + dt)


def max_stable_dt(dx, v1, v2, p: PhysicalParams, safety=SAFETY):
    """safety * min(dx^2/(2D), dx/max|v|)."""
    limit = dx**2 / (2.0 * p.D)
    vmax = max(abs(v1), abs(v2))
    if vmax > 0:
        limit = min(limit, dx / vmax)
    return safety * limit


def simulate(state0: FieldState, t_end, v1, v2, p: PhysicalParams, safety=SAFETY, every=None, frames=None, sink=None):
    """Integrate to ``t_end`` with a uniform step no larger than the stability bound.

    Snapshots go to ``sink`` (any callable) at the initial state, every
    ``every`` steps, and at the final state.  Passing ``frames`` instead rounds
    the step count up to a multiple of ``frames`` so that snapshots land on
    ``frames`` equal time intervals.
    """
    _check_grid(state0)
    span = t_end - state0.time
    if not span > 0:
        raise ParameterError(f"t_end must exceed the initial time, got {t_end!r}")
    if every is not None and frames is not None:
        raise ParameterError("give at most one of every/frames")
    dt_max = max_stable_dt(state0.grid.dx, v1, v2, p, safety)
    nsteps = math.ceil(span / dt_max)
    if frames is not None:
        if int(frames) != frames or frames < 1:
            raise ParameterError(f"frames must be a positive integer, got {frames!r}")
        nsteps = math.ceil(nsteps / frames) * frames
        every = nsteps // frames
    dt = span / nsteps
    N = state0.grid.N
    L = operator(N, state0.grid.dx, v1, v2, p)
    t0 = state0.time

    u = np.concatenate([state0.T1, state0.T2])
    peak = np.max(np.abs(u))
    if sink is not None:
        sink(state0)
    for k in range(1, nsteps + 1):
        u = _rk4(L, u, dt)
        peak = _guard(peak, u)
        if sink is not None and every and k % every == 0 and k != nsteps:
            sink(state0.evolved(u[:N], u[N:], t0 + k * dt))
    final = state0.evolved(u[:N], u[N:], t0 + span)
    if sink is not None:
        sink(final)
    return final

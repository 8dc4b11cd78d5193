import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aptrings import fdsolver as F
from aptrings.diagnostics import fit_decay, mode_magnitudes
from aptrings.errors import GridError, ParameterError, StabilityError
from aptrings.fields import FieldState, Grid, initial_state
from aptrings.params import reference_params
from aptrings.propagator import evolve

R = 21.0
VEP = 4.2


def smooth_state(N, seed=0):
    rng = np.random.default_rng(seed)
    g = Grid(N, R)
    th = g.x / R
    T1 = sum(rng.normal() * np.cos(k * th + rng.uniform(0, 6)) for k in range(4))
    T2 = sum(rng.normal() * np.cos(k * th + rng.uniform(0, 6)) for k in range(4))
    return FieldState(g, T1, T2)


def mirror_swap(state):
    # (T1, T2)(x) -> (T2, T1)(-x) on the periodic grid
    rev = (-np.arange(state.grid.N)) % state.grid.N
    return FieldState(state.grid, state.T2[rev], state.T1[rev], state.time)


def test_uniform_equal_field_is_steady(p):
    g = Grid(32, R)
    s = FieldState(g, np.full(32, 2.5), np.full(32, 2.5))
    d1, d2 = F.rhs(s, 3.0, 5.0, p)
    assert np.max(np.abs(d1)) <= 1e-15 and np.max(np.abs(d2)) <= 1e-15


def test_rhs_second_order(p):
    errs = []
    v1, v2 = 3.0, 5.0
    for N in (64, 128, 256):
        g = Grid(N, R)
        th = g.x / R
        s = FieldState(g, np.cos(th), np.sin(2 * th))
        d1, d2 = F.rhs(s, v1, v2, p)
        e1 = -p.D / R**2 * np.cos(th) + v1 / R * np.sin(th) + p.hc * (np.sin(2 * th) - np.cos(th))
        e2 = -4 * p.D / R**2 * np.sin(2 * th) + 2 * v2 / R * np.cos(2 * th) + p.hc * (np.cos(th) - np.sin(2 * th))
        errs.append(max(np.max(np.abs(d1 - e1)), np.max(np.abs(d2 - e2))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(orders - 2.0) < 0.05)


@settings(max_examples=30)
@given(v1=st.floats(-10, 10), v2=st.floats(-10, 10), seed=st.integers(0, 50))
def test_mirror_swap_symmetry(v1, v2, seed):
    p = reference_params()
    s = smooth_state(32, seed)
    d1, d2 = F.rhs(s, v1, v2, p)
    m1, m2 = F.rhs(mirror_swap(s), v2, v1, p)
    expect = mirror_swap(FieldState(s.grid, d1, d2))
    assert np.max(np.abs(m1 - expect.T1)) <= 1e-12 * max(1, np.max(np.abs(d2)))
    assert np.max(np.abs(m2 - expect.T2)) <= 1e-12 * max(1, np.max(np.abs(d1)))


def test_operator_matches_rhs(p):
    s = smooth_state(40, 2)
    L = F.operator(40, s.grid.dx, 2.0, 6.0, p)
    out = L @ np.concatenate([s.T1, s.T2])
    d1, d2 = F.rhs(s, 2.0, 6.0, p)
    assert np.max(np.abs(out[:40] - d1)) <= 1e-12
    assert np.max(np.abs(out[40:] - d2)) <= 1e-12


def test_zero_step_is_identity(p):
    s = smooth_state(32)
    assert F.step_rk4(s, 0.0, 1.0, 1.0, p) is s
    with pytest.raises(ParameterError):
        F.step_rk4(s, -1.0, 1.0, 1.0, p)


def test_equal_rings_without_advection_diffuse(p):
    g = Grid(64, R)
    s0 = initial_state(g, "cos-cos")
    t = 2.0
    out = F.simulate(s0, t, 0.0, 0.0, p)
    # semi-discrete decay rate of the n = 1 mode under the 3-point Laplacian
    k = 4.0 / g.dx**2 * math.sin(g.dx / (2 * R)) ** 2
    expected = math.exp(-p.D * k * t) * s0.T1
    assert np.max(np.abs(out.T1 - expected)) <= 1e-6
    assert np.max(np.abs(out.T1 - out.T2)) <= 1e-14


def test_total_heat_conserved(p):
    s0 = smooth_state(64, 4)
    before = np.sum(s0.T1 + s0.T2)
    out = F.simulate(s0, 3.0, 4.0, 4.0, p)
    assert np.sum(out.T1 + out.T2) == pytest.approx(before, abs=1e-10)


def test_instability_detected(p):
    s0 = smooth_state(64, 1)
    with pytest.raises(StabilityError):
        for _ in range(50):
            s0 = F.step_rk4(s0, 50 * F.max_stable_dt(s0.grid.dx, 0, 0, p), 0.0, 0.0, p)


def test_coarse_grid_refused(p):
    s = initial_state(Grid(8, R))
    with pytest.raises(GridError):
        F.simulate(s, 1.0, 1.0, 1.0, p)
    with pytest.raises(GridError):
        F.rhs(s, 1.0, 1.0, p)


def test_frames_land_on_equal_intervals(p):
    s0 = initial_state(Grid(32, R))
    got = []
    F.simulate(s0, 5.0, VEP, VEP, p, frames=10, sink=got.append)
    times = np.array([g.time for g in got])
    assert times.size == 11
    assert np.allclose(times, np.linspace(0, 5, 11), rtol=0, atol=1e-12)


def test_bad_end_time(p):
    s0 = initial_state(Grid(32, R))
    with pytest.raises(ParameterError):
        F.simulate(s0, 0.0, 1, 1, p)


def test_weak_coupling_matches_heat_kernel(p):
    q = p.replace(k_i=p.k_i * 1e-9)
    g = Grid(128, R)
    s0 = initial_state(g, "cos-sin")
    t, v = 3.0, 2.0
    out = F.simulate(s0, t, v, v, q)
    th = g.x / R
    damp = math.exp(-q.D * t / R**2)
    # ring 1 moves to +x, ring 2 to -x
    e1 = damp * np.cos(th - v * t / R)
    e2 = damp * np.sin(th + v * t / R)
    assert np.max(np.abs(out.T1 - e1)) <= 2e-3
    assert np.max(np.abs(out.T2 - e2)) <= 2e-3


def test_galilean_detuning(p):
    g = Grid(128, R)
    s0 = initial_state(g, "cos-cos")
    dv, t = 0.25, 4.0
    det = F.simulate(s0, t, VEP + dv, VEP - dv, p)
    sym = F.simulate(s0, t, VEP, VEP, p).shifted(dv * t)
    assert np.max(np.abs(det.T1 - sym.T1)) <= 2e-3
    assert np.max(np.abs(det.T2 - sym.T2)) <= 2e-3


def test_matches_spectral_solution(p):
    g = Grid(128, R)
    s0 = initial_state(g, "cos-cos")
    fd = F.simulate(s0, 10.0, VEP, VEP, p)
    ex = evolve(s0, 10.0, VEP, VEP, p)
    ref = max(np.max(np.abs(ex.T1)), np.max(np.abs(ex.T2)))
    assert max(np.max(np.abs(fd.T1 - ex.T1)), np.max(np.abs(fd.T2 - ex.T2))) / ref <= 2e-3


def test_kernel_decay_rate_within_one_percent(p):
    g = Grid(64, R)
    s0 = initial_state(g, "cos-negsin")
    frames = []
    F.simulate(s0, 10.0, VEP, VEP, p, frames=20, sink=frames.append)
    t, _, _, m = mode_magnitudes(frames)
    rate = fit_decay(t, m).rate
    assert rate == pytest.approx(0.426757, rel=1e-2)

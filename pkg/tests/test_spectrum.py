import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aptrings.errors import ParameterError, SearchError
from aptrings.params import reference_params
from aptrings.spectrum import (
    EP_RTOL,
    SPECTRUM_COLUMNS,
    Phase,
    build_hamiltonian,
    eigenfrequencies,
    eigenfrequencies_direct,
    find_ep,
    spectrum_csv,
    sweep_spectrum,
)

KAPPA = 1 / 21.0
GAMMA = 100.0 / 441.0 + 0.2  # kappa^2 D + h_c at R = 21 mm

speeds = st.floats(0.0, 20.0)
radii = st.floats(5.0, 60.0)
modes = st.integers(-4, 4).filter(bool)


def test_no_advection_equal_diagonal(p):
    H = build_hamiltonian(KAPPA, 0.0, p).entries
    assert H[0, 0] == H[1, 1]
    assert H[0, 0] == pytest.approx(-1j * GAMMA, rel=1e-12)


def test_entries_at_ep(p):
    H = build_hamiltonian(KAPPA, 4.2, p).entries
    assert H[0, 0] == pytest.approx(0.2 - 0.426757j, abs=1e-6)
    assert H[1, 1] == pytest.approx(-0.2 - 0.426757j, abs=1e-6)
    assert H[0, 1] == pytest.approx(0.2j, rel=1e-12)
    assert H[1, 0] == H[0, 1]


@given(R=radii, n=modes, v=speeds)
def test_apt_algebra(R, n, v):
    H = build_hamiltonian(n / R, v, reference_params())
    assert H.apt_residual() <= 1e-15 * np.linalg.norm(H.entries)


def test_static_eigenfrequencies(p):
    rep = eigenfrequencies(build_hamiltonian(KAPPA, 0.0, p))
    assert rep.omega_plus == pytest.approx(-0.626757j, abs=1e-6)
    assert rep.omega_minus == pytest.approx(-0.226757j, abs=1e-6)
    assert rep.phase is Phase.STATIC


def test_exceptional_point_coalescence(p):
    rep = eigenfrequencies(build_hamiltonian(KAPPA, 4.2, p))
    assert rep.phase is Phase.EXCEPTIONAL
    assert rep.omega_plus == pytest.approx(-0.426757j, abs=1e-6)
    assert abs(rep.omega_plus - rep.omega_minus) < 1e-7
    assert rep.coalescence_angle < 1e-6


def test_moving_eigenfrequencies(p):
    rep = eigenfrequencies(build_hamiltonian(KAPPA, 6.0, p))
    assert rep.phase is Phase.MOVING
    assert rep.omega_plus == pytest.approx(0.204041 - 0.426757j, abs=1e-6)
    assert rep.omega_minus == pytest.approx(-0.204041 - 0.426757j, abs=1e-6)
    # direct numerical oracle
    direct = sorted(np.linalg.eigvals(build_hamiltonian(KAPPA, 6.0, p).entries), key=lambda w: w.real)
    assert rep.omega_minus == pytest.approx(direct[0], rel=1e-12)
    assert rep.omega_plus == pytest.approx(direct[1], rel=1e-12)


@given(R=radii, n=modes, v=speeds, k_scale=st.floats(0.1, 10.0))
def test_closed_form_matches_direct_eigensolve(R, n, v, k_scale):
    p = reference_params().replace(k_i=reference_params().k_i * k_scale)
    H = build_hamiltonian(n / R, v, p)
    rep = eigenfrequencies(H)
    scale = abs(rep.omega_plus) + abs(rep.omega_minus)
    # a numerical eigensolve loses half the digits next to a defective point
    tol = 1e-12 * scale if abs(H.entries[0, 1] ** 2 + (n / R * v) ** 2) > 1e-6 * p.hc**2 else 1e-6 * scale

    def key(w):
        return (round(w.real, 6), w.imag)

    ours = sorted([rep.omega_plus, rep.omega_minus], key=key)
    for other in (np.linalg.eigvals(H.entries), eigenfrequencies_direct(H)):
        for w, o in zip(ours, sorted(other, key=key)):
            assert abs(w - o) <= tol


@given(R=radii, n=modes, v=speeds)
def test_trace_identity(R, n, v):
    p = reference_params()
    H = build_hamiltonian(n / R, v, p)
    rep = eigenfrequencies(H)
    assert rep.omega_plus + rep.omega_minus == pytest.approx(-2j * H.gamma, rel=1e-12)


@given(R=radii, n=modes, v=speeds)
def test_eigenvectors_are_eigenvectors(R, n, v):
    H = build_hamiltonian(n / R, v, reference_params())
    rep = eigenfrequencies(H)
    for w, u in ((rep.omega_plus, rep.eigvecs[:, 0]), (rep.omega_minus, rep.eigvecs[:, 1])):
        assert np.linalg.norm(u) == pytest.approx(1.0, rel=1e-12)
        assert np.linalg.norm(H.entries @ u - w * u) <= 1e-12 * np.linalg.norm(H.entries)


@given(R=radii, n=modes, v=speeds)
def test_phase_structure(R, n, v):
    p = reference_params()
    H = build_hamiltonian(n / R, v, p)
    rep = eigenfrequencies(H)
    disc = p.hc**2 - (n / R * v) ** 2
    if abs(disc) <= EP_RTOL * p.hc**2:
        assert rep.phase is Phase.EXCEPTIONAL
    elif disc > 0:
        assert rep.phase is Phase.STATIC
        assert rep.omega_plus.real == 0.0 and rep.omega_minus.real == 0.0
    else:
        assert rep.phase is Phase.MOVING
        assert rep.omega_plus.real == -rep.omega_minus.real != 0.0
        assert rep.omega_plus.imag == rep.omega_minus.imag


@given(R=radii, n=modes)
def test_modal_part_nilpotent_at_ep(R, n):
    p = reference_params()
    kappa = n / R
    H = build_hamiltonian(kappa, p.hc / abs(kappa), p)
    M = H.modal_part()
    assert np.linalg.norm(M @ M) <= 1e-12 * np.linalg.norm(M) ** 2


def test_find_ep(p):
    assert find_ep(KAPPA, p, (0.0, 10.0)) == pytest.approx(4.2, rel=1e-6)
    assert find_ep(1 / 20.0, p, (0.0, 10.0)) == pytest.approx(4.0, rel=1e-6)
    v = find_ep(KAPPA, p, (10.0, 0.5))
    assert abs(p.hc**2 - (KAPPA * v) ** 2) < 1e-12 * p.hc**2


@pytest.mark.parametrize("bracket", [(4.2, 4.2), (0.0, 1.0), (5.0, 9.0)])
def test_find_ep_bad_bracket(p, bracket):
    with pytest.raises(SearchError):
        find_ep(KAPPA, p, bracket)


def test_sweep_bifurcates_at_ep(p):
    reports = sweep_spectrum(KAPPA, p, 0.0, 8.4, 201)
    v = np.array([r.v for r in reports])
    nearest = int(np.argmin(abs(v - 4.2)))
    first_moving = next(i for i, r in enumerate(reports) if r.phase is Phase.MOVING)
    assert first_moving in (nearest, nearest + 1)
    assert all(r.omega_plus.real == 0.0 for r in reports[:nearest])
    assert all(r.omega_plus.real > 0.0 for r in reports[first_moving:])


def test_sweep_static_side_purely_imaginary(p):
    vep = p.hc / KAPPA
    reports = sweep_spectrum(KAPPA, p, 0.0, 2 * vep, 1001)
    static = [r for r in reports if r.phase is Phase.STATIC]
    assert len(static) >= 499
    assert max(max(abs(r.omega_plus.real), abs(r.omega_minus.real)) for r in static) == 0.0


def test_sweep_direction_independent(p):
    fwd = sweep_spectrum(KAPPA, p, 0.0, 8.4, 51)
    rev = sweep_spectrum(KAPPA, p, 8.4, 0.0, 51)
    a = np.array(sorted(r.row()[:5] for r in fwd))
    b = np.array(sorted(r.row()[:5] for r in rev))
    assert np.allclose(a, b, rtol=1e-12, atol=1e-14)
    assert Counter(r.phase for r in fwd) == Counter(r.phase for r in rev)


def test_sweep_needs_two_steps(p):
    with pytest.raises(ParameterError):
        sweep_spectrum(KAPPA, p, 0.0, 8.4, 1)


def test_csv_layout(p):
    text = spectrum_csv(sweep_spectrum(KAPPA, p, 0.0, 8.4, 5))
    lines = text.splitlines()
    assert lines[0] == ",".join(SPECTRUM_COLUMNS)
    assert len(lines) == 6
    assert lines[1].endswith("STATIC") and lines[-1].endswith("MOVING")
    first = lines[1].split(",")
    assert len(first[1]) == len("0.0000000000000000e+00")

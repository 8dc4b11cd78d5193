"""Observables extracted from simulated trajectories.

All estimators work on Fourier modes n != 0, so a global offset T0 added to
both rings never changes a result.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize

from ._csv import fmt, write_rows
from .errors import CadenceError, FitError, GridError
from .fields import FieldState

NOISE_FLOOR = 1e-14
#: largest wrapped phase increment between frames accepted as unambiguous
MAX_PHASE_STEP = 0.9 * math.pi


def fundamental(state: FieldState, n=1):
    """Complex amplitudes (c1, c2) of exp(i n x / R) in T1 and T2."""
    N = state.grid.N
    if not 0 < abs(n) < N / 2:
        raise GridError(f"mode {n} is not resolved on N = {N}")
    k = n % N
    return complex(np.fft.fft(state.T1)[k] / N), complex(np.fft.fft(state.T2)[k] / N)


# ---------------------------------------------------------------------------
# decay

@dataclass(frozen=True)
class DecayFit:
    rate: float
    residual: float
    model: str = "exponential"
    params: tuple = ()


def _decay_inputs(t, magnitude):
    t = np.asarray(t, dtype=float)
    m = np.asarray(magnitude, dtype=float)
    if t.shape != m.shape or t.ndim != 1:
        raise FitError("times and magnitudes must be 1-D arrays of equal length")
    if t.size < 10:
        raise FitError(f"need at least 10 samples, got {t.size}")
    if np.any(~np.isfinite(m)) or np.any(m <= NOISE_FLOOR):
        raise FitError("magnitudes must be finite and above the noise floor")
    return t, m


def fit_decay(t, magnitude):
    """Least-squares slope of log|a| against t; rate = -slope, residual = RMS misfit of log|a|."""
    t, m = _decay_inputs(t, magnitude)
    y = np.log(m)
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    return DecayFit(rate=float(-slope), residual=float(np.sqrt(np.mean(resid**2))))


def fit_decay_secular(t, magnitude):
    """Fit |a|^2 = e^{-2 g t} q(t) with q quadratic, the envelope of a 2x2 Jordan block.

    For a trial rate g the prefactor q is fitted to log|a| + g t by least
    squares; g then minimizes what is left.  A cheap linear prefit of q seeds
    the search over g.  Returns g with the RMS misfit of log|a|; ``params``
    holds q's coefficients normalized to q(0) = 1.  On data without a secular
    term g and q's slope are nearly collinear and g is only weakly
    determined; use :func:`fit_decay` there.
    """
    t, m = _decay_inputs(t, magnitude)
    y = np.log(m)
    plain = fit_decay(t, m)
    tau = t - t[0]
    basis = np.vstack([np.ones_like(tau), tau, tau**2]).T

    def prefit(g):
        # relative least squares of |a|^2 e^{2 g t} against a quadratic
        target = np.exp(2.0 * (y - y[0]) + 2.0 * g * tau)
        coef, *_ = np.linalg.lstsq(basis / target[:, None], np.ones_like(target), rcond=None)
        q = basis @ coef
        if np.any(q <= 0):
            return np.inf
        resid = y - y[0] + g * tau - 0.5 * np.log(q)
        return float(np.mean((resid - resid.mean()) ** 2))

    def residual(g, c):
        q = np.maximum(1.0 + c[0] * tau + c[1] * tau**2, np.finfo(float).tiny)
        r = y + g * tau - 0.5 * np.log(q)
        return r - r.mean()

    def inner(g, start=(0.0, 0.0)):
        res = optimize.least_squares(
            lambda c: residual(g, c), start, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15
        )
        return res.cost, res.x

    span = max(tau[-1], np.finfo(float).tiny)
    lo, hi = min(0.0, plain.rate) - 1.0 / span, max(2.0 * plain.rate, 0.0) + 4.0 / span
    grid = np.linspace(lo, hi, 401)
    vals = np.array([prefit(g) for g in grid])
    if not np.isfinite(vals).any():
        raise FitError("secular decay fit failed: no admissible quadratic prefactor")
    # refine around the lowest prefit points; the true basin can be narrower than the grid
    best = None
    for i in np.argsort(vals)[:4]:
        if not np.isfinite(vals[i]):
            continue
        a, b = grid[max(i - 2, 0)], grid[min(i + 2, grid.size - 1)]
        res = optimize.minimize_scalar(
            lambda g: inner(g)[0], bounds=(a, b), method="bounded", options={"xatol": 1e-14}
        )
        if best is None or res.fun < best.fun:
            best = res
    g = float(best.x)
    _, c = inner(g)
    if np.any(1.0 + c[0] * tau + c[1] * tau**2 <= 0):
        raise FitError("secular decay fit failed: no admissible quadratic prefactor")
    resid = residual(g, c)
    return DecayFit(
        rate=g,
        residual=float(np.sqrt(np.mean(resid**2))),
        model="secular",
        params=(float(c[0]), float(c[1])),
    )


def mode_magnitudes(trajectory, n=1):
    """(t, |c1|, |c2|, sqrt(|c1|^2 + |c2|^2)) of mode ``n`` along a trajectory."""
    t = np.array([s.time for s in trajectory])
    amps = np.array([fundamental(s, n) for s in trajectory])
    m1, m2 = np.abs(amps[:, 0]), np.abs(amps[:, 1])
    return t, m1, m2, np.hypot(m1, m2)


# ---------------------------------------------------------------------------
# drift

@dataclass(frozen=True)
class DriftEstimate:
    speed: float
    residual: float
    ring1: float
    ring2: float


def _unwrapped_phase(values):
    phase = np.angle(values)
    steps = np.diff(phase)
    wrapped = (steps + np.pi) % (2 * np.pi) - np.pi
    if np.any(np.abs(wrapped) > MAX_PHASE_STEP):
        raise CadenceError("phase advances by nearly pi between frames; snapshots are too sparse")
    return np.concatenate([[phase[0]], phase[0] + np.cumsum(wrapped)])


def drift_velocity(trajectory, n=1):
    """Translation speed [mm/s] from the fundamental-mode phase.

    A profile T(x - s t) has c_n(t) = c_n(0) exp(-i n s t / R), so
    s = -R (d phase/dt) / n.  The speed reported is from the mean of the two
    rings' unwrapped phases, which cancels the opposite phase swings of a
    mirror-symmetric pair; per-ring speeds are kept alongside.
    """
    if len(trajectory) < 2:
        raise FitError("need at least two snapshots for a drift estimate")
    R = trajectory[0].grid.R
    t = np.array([s.time for s in trajectory])
    amps = np.array([fundamental(s, n) for s in trajectory])
    ref = np.max(np.abs(amps))
    if ref == 0 or np.any(np.abs(amps) <= max(NOISE_FLOOR, 1e-12 * ref)):
        raise FitError("fundamental mode below the noise floor in some frame")
    ph1 = _unwrapped_phase(amps[:, 0])
    ph2 = _unwrapped_phase(amps[:, 1])
    # keep the two unwrapped branches within pi of each other before averaging
    ph2 += 2 * np.pi * np.round((ph1[0] - ph2[0]) / (2 * np.pi))
    mean = 0.5 * (ph1 + ph2)

    def speed(phase):
        slope, intercept = np.polyfit(t, phase, 1)
        return -R * slope / n, phase - (slope * t + intercept)

    s, resid = speed(mean)
    return DriftEstimate(
        speed=float(s),
        residual=float(np.sqrt(np.mean(resid**2))),
        ring1=float(speed(ph1)[0]),
        ring2=float(speed(ph2)[0]),
    )


# ---------------------------------------------------------------------------
# spatial beats

@dataclass(frozen=True)
class BeatReport:
    present: bool
    beat: float | None = None
    k_low: float | None = None
    k_high: float | None = None
    residual: float | None = None


def expected_beat(epsilon):
    """chi2 - chi1 = 1 - sqrt(1 - eps^2) in z-units."""
    return 1.0 - math.sqrt(1.0 - epsilon**2)


def _two_tone(coord, y, ka, kb):
    basis = np.vstack(
        [np.cos(ka * coord), np.sin(ka * coord), np.cos(kb * coord), np.sin(kb * coord), np.ones_like(coord)]
    ).T
    coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
    return coef, y - basis @ coef


def _tone_grid_search(coord, y, kmax, step, min_sep):
    """Best (ka, kb) pair on a uniform wavenumber grid by two-tone residual.

    All pairs are scored at once from the Gram matrix of the shared columns.
    """
    ks = np.arange(min_sep, kmax + step, step)
    cols = np.vstack([np.ones_like(coord)] + [f(k * coord) for k in ks for f in (np.cos, np.sin)]).T
    gram = cols.T @ cols
    rhs = cols.T @ y
    ia, ib = np.triu_indices(ks.size, 1)
    keep = ks[ib] - ks[ia] >= min_sep
    ia, ib = ia[keep], ib[keep]
    if ia.size == 0:
        return None
    sel = np.stack([np.zeros_like(ia), 1 + 2 * ia, 2 + 2 * ia, 1 + 2 * ib, 2 + 2 * ib], axis=1)
    G = gram[sel[:, :, None], sel[:, None, :]]
    b = rhs[sel]
    ridge = 1e-12 * np.trace(G, axis1=1, axis2=2)[:, None, None] * np.eye(5)
    coef = np.linalg.solve(G + ridge, b[:, :, None])[:, :, 0]
    score = y @ y - np.einsum("pi,pi->p", coef, b)
    best = int(np.argmin(score))
    return ks[ia[best]], ks[ib[best]]


def beat_wavenumber(coord, profile, rel_threshold=1e-2, pad=16, max_search=256):
    """Separation of the two dominant spatial frequencies of ``profile``.

    A profile spanning one ring cannot separate tones closer than one cycle
    per span by spectral peaks alone, so both wavenumbers are located by a
    coarse grid search on a two-tone model (amplitudes solved linearly, on at
    most ``max_search`` samples) and then refined by least squares on the
    full profile.  Wavenumbers are in units of 1/``coord`` (pass z for
    z-units, x for 1/mm).  The beat is absent when the weaker tone carries
    less than ``rel_threshold`` of the stronger one's amplitude.
    """
    coord = np.asarray(coord, dtype=float)
    y = np.asarray(profile, dtype=float)
    if coord.shape != y.shape or coord.size < 8:
        raise GridError("coordinate and profile must be equal-length arrays of >= 8 samples")
    h = coord[1] - coord[0]
    span = h * coord.size
    y0 = y - y.mean()
    scale = np.max(np.abs(y0))
    if scale == 0:
        return BeatReport(present=False)
    # band that carries the signal, from a windowed, zero-padded spectrum
    nfft = pad * coord.size
    spec = np.abs(np.fft.rfft(y0 * np.hanning(coord.size), nfft))
    k = 2.0 * np.pi * np.fft.rfftfreq(nfft, d=h)
    kmax = k[np.nonzero(spec >= 1e-3 * spec.max())[0][-1]] + 2.0 * np.pi / span
    unit = 2.0 * np.pi / span
    stride = max(1, coord.size // max_search)
    guess = _tone_grid_search(coord[::stride], y[::stride], kmax, 0.05 * unit, 0.2 * unit)
    if guess is None:
        return BeatReport(present=False)

    res = optimize.least_squares(
        lambda ks: _two_tone(coord, y, ks[0], ks[1])[1] / scale,
        np.asarray(guess),
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
    )
    ka, kb = np.abs(res.x)
    coef, resid = _two_tone(coord, y, ka, kb)
    amp_a, amp_b = np.hypot(coef[0], coef[1]), np.hypot(coef[2], coef[3])
    if min(ka, kb) < 0.1 * unit or abs(kb - ka) < 0.1 * unit or min(amp_a, amp_b) < rel_threshold * max(amp_a, amp_b):
        return BeatReport(present=False)
    ka, kb = sorted((ka, kb))
    return BeatReport(
        present=True,
        beat=float(kb - ka),
        k_low=float(ka),
        k_high=float(kb),
        residual=float(np.sqrt(np.mean(resid**2)) / scale),
    )


# ---------------------------------------------------------------------------
# phase lag and comparisons

def phase_lag(state: FieldState, n=1):
    """arg(c2 / c1) in (-pi, pi]; positive means ring 2 leads ring 1."""
    c1, c2 = fundamental(state, n)
    if abs(c1) <= NOISE_FLOOR or abs(c2) <= NOISE_FLOOR:
        raise FitError("phase lag undefined: a fundamental amplitude vanishes")
    lag = math.atan2((c2 * c1.conjugate()).imag, (c2 * c1.conjugate()).real)
    return math.pi if lag == -math.pi else lag


def predicted_ep_lag(t, hc):
    """Lag of the EP secular solution started from T1 = T2 = cos(x/R): 2 atan(h_c t / (1 + h_c t))."""
    s = hc * np.asarray(t, dtype=float)
    return 2.0 * np.arctan(s / (1.0 + s))


@dataclass(frozen=True)
class Norms:
    l2_abs: float
    l2_rel: float
    linf_abs: float
    linf_rel: float


def compare(field_a: FieldState, field_b: FieldState, time_tol=1e-12):
    """L2 and L-infinity differences per ring; norms are relative to ``field_b``."""
    if field_a.grid != field_b.grid:
        raise GridError(f"grid mismatch: {field_a.grid} vs {field_b.grid}")
    if abs(field_a.time - field_b.time) > time_tol * max(1.0, abs(field_b.time)):
        raise GridError(f"time mismatch: {field_a.time} vs {field_b.time}")
    dx = field_a.grid.dx
    out = {}
    for name in ("T1", "T2"):
        a = getattr(field_a, name) + field_a.T0
        b = getattr(field_b, name) + field_b.T0
        d = a - b
        l2 = math.sqrt(dx * float(np.sum(d * d)))
        l2_ref = math.sqrt(dx * float(np.sum(b * b)))
        linf = float(np.max(np.abs(d)))
        linf_ref = float(np.max(np.abs(b)))
        out[name] = Norms(
            l2_abs=l2,
            l2_rel=l2 / l2_ref if l2_ref else math.inf if l2 else 0.0,
            linf_abs=linf,
            linf_rel=linf / linf_ref if linf_ref else math.inf if linf else 0.0,
        )
    return out


def max_relative_linf(field_a, field_b):
    """max |a - b| over both rings divided by max |b| over both rings."""
    norms = compare(field_a, field_b)
    ref = max(np.max(np.abs(field_b.T1)), np.max(np.abs(field_b.T2)))
    worst = max(n.linf_abs for n in norms.values())
    return worst / ref if ref else worst


COMPARE_COLUMNS = ("ring", "l2_abs", "l2_rel", "linf_abs", "linf_rel")


def compare_csv(norms, comments=()):
    rows = [(ring, n.l2_abs, n.l2_rel, n.linf_abs, n.linf_rel) for ring, n in sorted(norms.items())]
    return write_rows(COMPARE_COLUMNS, rows, comments)


# ---------------------------------------------------------------------------
# combined report

@dataclass(frozen=True)
class ObservableReport:
    decay_rate: float
    decay_residual: float
    secular_decay_rate: float
    secular_decay_residual: float
    drift_velocity: float
    drift_residual: float
    drift_ring1: float
    drift_ring2: float
    phase_lag_final: float
    beat_wavenumber: float | None
    beat_residual: float | None
    n: int = 1

    def row(self):
        return tuple(self._values().values())

    def _values(self):
        values = asdict(self)
        return {k: ("" if v is None else v) for k, v in values.items()}

    def summary(self):
        lines = []
        for key, value in self._values().items():
            lines.append(f"{key:>24s} : {fmt(value) if value != '' else 'absent'}")
        return "\n".join(lines) + "\n"


OBSERVABLE_COLUMNS = tuple(ObservableReport.__dataclass_fields__)


def observe(trajectory, n=1):
    """Run every estimator over a trajectory of FieldState snapshots."""
    t, m1, m2, mt = mode_magnitudes(trajectory, n)
    plain = fit_decay(t, mt)
    try:
        secular = fit_decay_secular(t, mt)
    except FitError:
        secular = DecayFit(math.nan, math.nan, "secular")
    drift = drift_velocity(trajectory, n)
    last = trajectory[-1]
    beat = beat_wavenumber(last.x, last.T2)
    return ObservableReport(
        decay_rate=plain.rate,
        decay_residual=plain.residual,
        secular_decay_rate=secular.rate,
        secular_decay_residual=secular.residual,
        drift_velocity=drift.speed,
        drift_residual=drift.residual,
        drift_ring1=drift.ring1,
        drift_ring2=drift.ring2,
        phase_lag_final=phase_lag(last, n),
        beat_wavenumber=beat.beat if beat.present else None,
        beat_residual=beat.residual if beat.present else None,
        n=n,
    )


def observables_csv(reports, comments=()):
    return write_rows(OBSERVABLE_COLUMNS, (r.row() for r in reports), comments)

"""Sampled temperature fields on the periodic ring and their snapshot CSV format."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._csv import fmt, read_rows, write_rows
from .errors import ConfigError, GridError, ParameterError

SNAPSHOT_COLUMNS = ("x_mm", "T1_K", "T2_K")


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid of ``N`` points on a ring of inner radius ``R`` [mm]."""

    N: int
    R: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 4:
            raise GridError(f"grid needs at least 4 points, got N = {self.N!r}")
        if not self.R > 0:
            raise ParameterError(f"R must be positive, got {self.R!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "R", float(self.R))

    @property
    def L(self):
        return 2.0 * math.pi * self.R

    @property
    def dx(self):
        return self.L / self.N

    @property
    def x(self):
        return np.arange(self.N) * self.dx


@dataclass(frozen=True)
class FieldState:
    """Temperature deviations T_i - T0 of both rings at one instant."""

    grid: Grid
    T1: np.ndarray
    T2: np.ndarray
    time: float = 0.0
    T0: float = 0.0

    def __post_init__(self):
        T1 = np.array(self.T1, dtype=float)
        T2 = np.array(self.T2, dtype=float)
        if T1.shape != (self.grid.N,) or T2.shape != (self.grid.N,):
            raise GridError(
                f"field arrays must both have length {self.grid.N}, got {T1.shape} and {T2.shape}"
            )
        if not (np.all(np.isfinite(T1)) and np.all(np.isfinite(T2))):
            raise GridError("field contains non-finite values")
        T1.flags.writeable = False
        T2.flags.writeable = False
        object.__setattr__(self, "T1", T1)
        object.__setattr__(self, "T2", T2)
        object.__setattr__(self, "time", float(self.time))

    @property
    def x(self):
        return self.grid.x

    def stacked(self):
        return np.vstack([self.T1, self.T2])

    def evolved(self, T1, T2, time):
        return FieldState(self.grid, T1, T2, time, self.T0)

    def shifted(self, distance):
        """Both rings translated by ``distance`` mm along +x (band-limited interpolation)."""
        k = 2.0 * math.pi * np.fft.fftfreq(self.grid.N, d=self.grid.dx)
        phase = np.exp(-1j * k * distance)
        if self.grid.N % 2 == 0:
            # the Nyquist mode cannot carry a sub-grid shift in a real field
            phase[self.grid.N // 2] = math.cos(k[self.grid.N // 2] * distance)
        T1 = np.fft.ifft(np.fft.fft(self.T1) * phase).real
        T2 = np.fft.ifft(np.fft.fft(self.T2) * phase).real
        return self.evolved(T1, T2, self.time)


IC_KINDS = ("cos-cos", "cos-sin", "cos-negsin")


def initial_state(grid: Grid, kind="cos-cos", A=1.0, n=1, T0=0.0):
    """Standard initial profiles.

    cos-cos     T1 = T2 = A cos(n x/R)
    cos-sin     T1 = A cos(n x/R), T2 = +A sin(n x/R)
    cos-negsin  T1 = A cos(n x/R), T2 = -A sin(n x/R)  (kernel of the EP Jordan block)
    """
    theta = n * grid.x / grid.R
    c, s = A * np.cos(theta), A * np.sin(theta)
    if kind == "cos-cos":
        return FieldState(grid, c, c, 0.0, T0)
    if kind == "cos-sin":
        return FieldState(grid, c, s, 0.0, T0)
    if kind == "cos-negsin":
        return FieldState(grid, c, -s, 0.0, T0)
    raise ConfigError(f"unknown initial condition {kind!r}; choose from {IC_KINDS}")


def snapshot_csv(state: FieldState):
    comments = [f"t_s = {fmt(state.time)}", f"R_mm = {fmt(state.grid.R)}", f"T0_K = {fmt(state.T0)}"]
    rows = zip(state.x, state.T1, state.T2)
    return write_rows(SNAPSHOT_COLUMNS, rows, comments)


def parse_snapshot(text, source="<snapshot>"):
    comments, header, rows = read_rows(text)
    if header != list(SNAPSHOT_COLUMNS):
        raise ConfigError(f"{source}: expected columns {SNAPSHOT_COLUMNS}, got {header}")
    meta = {}
    for line in comments:
        if "=" in line:
            key, value = (s.strip() for s in line.split("=", 1))
            meta[key] = value
    try:
        data = np.array(rows, dtype=float)
        time = float(meta.get("t_s", 0.0))
        T0 = float(meta.get("T0_K", 0.0))
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    if data.ndim != 2 or data.shape[1] != 3:
        raise ConfigError(f"{source}: malformed snapshot rows")
    N = data.shape[0]
    if "R_mm" in meta:
        R = float(meta["R_mm"])
    else:
        R = N * (data[1, 0] - data[0, 0]) / (2.0 * math.pi)
    return FieldState(Grid(N, R), data[:, 1], data[:, 2], time, T0)


def read_snapshot(path):
    path = Path(path)
    return parse_snapshot(path.read_text(encoding="utf-8"), str(path))


def write_snapshot(state: FieldState, path):
    Path(path).write_text(snapshot_csv(state), encoding="utf-8")

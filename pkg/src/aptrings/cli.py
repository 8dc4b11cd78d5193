"""Command-line front end.

Subcommands: spectrum, ep-window, closed-form, simulate, compare, detune-sweep.
Every command writes into an output directory: ``--out`` if given, else
``$APTRINGS_OUTPUT``, else ``./aptrings-output``.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import diagnostics, epform, fdsolver, propagator, spectrum
from ._csv import fmt, write_rows
from .errors import AptRingsError, ConfigError, NumericalError, SingularityError
from .fields import IC_KINDS, FieldState, Grid, initial_state, read_snapshot, snapshot_csv
from .params import (
    PARAM_KEYS,
    PhysicalParams,
    epsilon_of,
    lambda_of,
    reference_params,
    params_from_mapping,
    parse_key_values,
    v_ep,
)

OUTPUT_ENV = "APTRINGS_OUTPUT"
EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3

SCENARIO_KEYS = {
    "R": float,
    "deltaR": float,
    "n": int,
    "v": float,
    "v1": float,
    "v2": float,
    "dv": float,
    "ic": str,
    "samples": str,
    "solver": str,
    "grid": int,
    "t_end": float,
    "frames": int,
    "A": float,
    "T0": float,
}
SOLVERS = ("spectral", "fd")


@dataclass(frozen=True)
class Scenario:
    params: PhysicalParams
    R: float = 21.0
    deltaR: float = 0.0
    n: int = 1
    v: float | None = None
    v1: float | None = None
    v2: float | None = None
    dv: float | None = None
    ic: str = "cos-cos"
    samples: str | None = None
    solver: str = "spectral"
    grid: int = 256
    t_end: float = 10.0
    frames: int = 50
    A: float = 1.0
    T0: float = 0.0

    def __post_init__(self):
        forms = [self.v is not None, self.v1 is not None or self.v2 is not None, self.dv is not None]
        if sum(forms) > 1:
            raise ConfigError("give exactly one speed form: v, or v1 and v2, or dv")
        if (self.v1 is None) != (self.v2 is None):
            raise ConfigError("v1 and v2 must be given together")
        if self.ic not in IC_KINDS + ("samples",):
            raise ConfigError(f"unknown ic {self.ic!r}; choose from {IC_KINDS + ('samples',)}")
        if self.ic == "samples" and not self.samples:
            raise ConfigError("ic = samples needs a samples file")
        if self.solver not in SOLVERS:
            raise ConfigError(f"unknown solver {self.solver!r}; choose from {SOLVERS}")
        if not self.t_end > 0:
            raise ConfigError(f"t_end must be positive, got {self.t_end}")
        if self.frames < 10:
            raise ConfigError(f"frames must be at least 10 for the decay fit, got {self.frames}")
        if self.grid < 4:
            raise ConfigError(f"grid must have at least 4 points, got {self.grid}")
        if self.solver == "fd" and self.grid < fdsolver.MIN_POINTS:
            raise ConfigError(f"finite-difference solver needs grid >= {fdsolver.MIN_POINTS}, got {self.grid}")
        if self.n == 0:
            raise ConfigError("mode n must be nonzero")

    @property
    def v_ep(self):
        return v_ep(self.params.hc, self.n / self.R)

    def speeds(self):
        """(v1, v2) with ring 1 moving at +v1 and ring 2 at -v2."""
        if self.v is not None:
            return self.v, self.v
        if self.v1 is not None:
            return self.v1, self.v2
        dv = self.dv or 0.0
        return self.v_ep + dv, self.v_ep - dv

    def initial(self):
        if self.ic == "samples":
            state = read_snapshot(self.samples)
            if state.grid.N != self.grid or not math.isclose(state.grid.R, self.R, rel_tol=1e-12):
                raise ConfigError("samples file grid does not match the scenario grid/R")
            return FieldState(state.grid, state.T1, state.T2, 0.0, self.T0)
        return initial_state(Grid(self.grid, self.R), self.ic, self.A, self.n, self.T0)


def _split_config(values, source):
    params = {k: v for k, v in values.items() if k in PARAM_KEYS}
    scenario = {}
    for key, raw in values.items():
        if key in PARAM_KEYS:
            continue
        if key not in SCENARIO_KEYS:
            raise ConfigError(f"{source}: unknown key {key!r}")
        try:
            scenario[key] = SCENARIO_KEYS[key](raw)
        except ValueError:
            raise ConfigError(f"{source}: {key} = {raw!r} has the wrong type") from None
    return params, scenario


def load_config(path):
    """Read a combined parameter/scenario file; returns (params or None, scenario dict)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    values = parse_key_values(text, str(path))
    params, scenario = _split_config(values, str(path))
    return (params_from_mapping(params, str(path)) if params or not scenario else None), scenario


def _scenario_from_args(args):
    params, values = None, {}
    if args.config:
        params, values = load_config(args.config)
        if params is None:
            raise ConfigError(f"{args.config}: no physical parameters given (need {list(PARAM_KEYS)})")
    if params is None:
        params = reference_params()
    flag_map = {
        "radius_mm": "R", "n": "n", "v": "v", "v1": "v1", "v2": "v2", "dv": "dv", "ic": "ic",
        "samples": "samples", "solver": "solver", "grid": "grid", "t_end": "t_end",
        "frames": "frames", "A": "A", "T0": "T0",
    }
    for attr, key in flag_map.items():
        value = getattr(args, attr, None)
        if value is not None:
            values[key] = value
    # a speed form given on the command line replaces any speed form from the file
    cli_speed = {k for k in ("v", "v1", "v2", "dv") if getattr(args, k, None) is not None}
    if cli_speed:
        for k in {"v", "v1", "v2", "dv"} - cli_speed:
            values.pop(k, None)
    return Scenario(params=params, **values)


def _params_from_args(args):
    if getattr(args, "config", None):
        params, _ = load_config(args.config)
        if params is None:
            raise ConfigError(f"{args.config}: no physical parameters given")
        return params
    return reference_params()


def _outdir(args):
    root = args.out or os.environ.get(OUTPUT_ENV) or "aptrings-output"
    path = Path(root)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def _config_value(args, key, default):
    """Scenario value from --config when the flag is absent."""
    if getattr(args, "config", None):
        _, values = load_config(args.config)
        if key in values:
            return values[key]
    return default


# ---------------------------------------------------------------------------
# commands

def cmd_spectrum(args, out):
    p = _params_from_args(args)
    R = args.radius_mm if args.radius_mm is not None else _config_value(args, "R", 21.0)
    n = args.n if args.n is not None else _config_value(args, "n", 1)
    if args.steps < 2:
        raise ConfigError(f"--steps must be at least 2, got {args.steps}")
    if n == 0:
        raise ConfigError("--n must be nonzero")
    kappa = n / R
    vep = v_ep(p.hc, kappa)
    v_max = args.v_max if args.v_max is not None else 2.0 * vep
    reports = spectrum.sweep_spectrum(kappa, p, args.v_min, v_max, args.steps)
    comments = [f"R_mm = {fmt(R)}", f"n = {n}", f"v_ep_mm_per_s = {fmt(vep)}"]
    path = _write(out / "spectrum.csv", spectrum.spectrum_csv(reports, comments))
    first_moving = next((r.v for r in reports if r.phase is spectrum.Phase.MOVING), None)
    print(f"v_EP = {fmt(vep)} mm/s")
    print(f"first MOVING sample: {fmt(first_moving) if first_moving is not None else 'none'}")
    print(f"wrote {path.name}")


def _window_text(p, n):
    lo, hi = epform.epsilon_window()
    slo, shi = epform.scan_epsilon_window()
    r_lo, r_hi = epform.radius_window(p, n)
    lines = [
        f"h_c_per_s = {fmt(p.hc)}",
        f"D_mm2_per_s = {fmt(p.D)}",
        f"n = {n}",
        f"epsilon_lo = {fmt(lo)}",
        f"epsilon_hi = {fmt(hi)}",
        f"epsilon_lo_scan = {fmt(slo)}",
        f"epsilon_hi_scan = {fmt(shi)}",
        f"R_lo_mm = {fmt(r_lo)}",
        f"R_hi_mm = {fmt(r_hi)}",
    ]
    return "\n".join(lines) + "\n"


def cmd_ep_window(args, out):
    p = _params_from_args(args)
    n = args.n if args.n is not None else _config_value(args, "n", 1)
    if n == 0:
        raise ConfigError("--n must be nonzero")
    text = _window_text(p, n)
    _write(out / "ep_window.txt", text)
    sys.stdout.write(text)


def cmd_closed_form(args, out):
    p = _params_from_args(args)
    R = args.radius_mm if args.radius_mm is not None else _config_value(args, "R", 21.0)
    n = args.n if args.n is not None else _config_value(args, "n", 1)
    A = args.A if args.A is not None else _config_value(args, "A", 1.0)
    if args.points < 32:
        raise ConfigError(f"--points must be at least 32, got {args.points}")
    literal = epform.closed_form(p, R, n, A, epform.Variant.PAPER_LITERAL)
    consistent = epform.closed_form(p, R, n, A, epform.Variant.ODE_CONSISTENT)
    phi_cf = literal.phi
    phi_lit = epform.phi_periodic(literal)
    phi_con = epform.phi_periodic(consistent)
    consistent_periodic = consistent.with_phi(phi_con)

    x = np.linspace(0.0, 2.0 * math.pi * R, args.points)
    rows = zip(
        x,
        epform.f1_profile(x, literal),
        epform.f2_profile(x, literal),
        epform.f2_profile(x, consistent_periodic),
    )
    comments = [
        f"R_mm = {fmt(R)}",
        f"n = {n}",
        "f2_paper_literal_K uses phi from the closed-form arctan expression",
        "f2_ode_consistent_K uses phi from the periodicity root-solve",
    ]
    _write(
        out / "closed_form.csv",
        write_rows(("x_mm", "f1_K", "f2_paper_literal_K", "f2_ode_consistent_K"), rows, comments),
    )

    eps = literal.epsilon
    lit_gap = epform.seam_gaps(literal)
    con_gap_cf = epform.seam_gaps(consistent)
    con_gap = epform.seam_gaps(consistent_periodic)
    summary = {
        "epsilon": eps,
        "lambda": literal.lam,
        "alpha": literal.alpha,
        "phi_closed_form": phi_cf,
        "phi_root_paper_literal": phi_lit,
        "phi_root_ode_consistent": phi_con,
        "phi_discrepancy_paper_literal": phi_lit - phi_cf,
        "phi_discrepancy_ode_consistent": phi_con - phi_cf,
        "seam_value_gap_paper_literal": lit_gap[0],
        "seam_slope_gap_paper_literal": lit_gap[1],
        "seam_value_gap_ode_consistent_phi_closed_form": con_gap_cf[0],
        "seam_value_gap_ode_consistent_phi_root": con_gap[0],
        "seam_slope_gap_ode_consistent_phi_root": con_gap[1],
        "in_epsilon_window": epform.in_epsilon_window(eps),
        "oscillatory_conditions_i_ii": epform.chi_squared(eps, eps).oscillatory,
    }
    lines = ["{"]
    items = list(summary.items())
    for i, (key, value) in enumerate(items):
        text = str(value).lower() if isinstance(value, bool) else fmt(value)
        lines.append(f'  "{key}": {text}' + ("," if i < len(items) - 1 else ""))
    lines.append("}")
    text = "\n".join(lines) + "\n"
    _write(out / "closed_form_summary.txt", text)
    sys.stdout.write(text)


def _run(scenario: Scenario, solver=None):
    """Trajectory of ``frames + 1`` snapshots at equal time intervals."""
    solver = solver or scenario.solver
    p = scenario.params
    v1, v2 = scenario.speeds()
    state0 = scenario.initial()
    if solver == "spectral":
        times = np.linspace(0.0, scenario.t_end, scenario.frames + 1)
        return propagator.trajectory(state0, times, v1, v2, p)
    frames = []
    fdsolver.simulate(state0, scenario.t_end, v1, v2, p, frames=scenario.frames, sink=frames.append)
    return frames


def _report_files(out, scenario, traj):
    report = diagnostics.observe(traj, abs(scenario.n))
    v1, v2 = scenario.speeds()
    comments = [
        f"solver = {scenario.solver}",
        f"v1_mm_per_s = {fmt(v1)}",
        f"v2_mm_per_s = {fmt(v2)}",
        "phase_lag_final > 0 means ring 2 leads ring 1",
    ]
    _write(out / "observables.csv", diagnostics.observables_csv([report], comments))
    _write(out / "observables.txt", report.summary())
    return report


def cmd_simulate(args, out):
    scenario = _scenario_from_args(args)
    traj = _run(scenario)
    width = len(str(len(traj) - 1))
    for i, state in enumerate(traj):
        _write(out / f"snapshot_{i:0{width}d}.csv", snapshot_csv(state))
    report = _report_files(out, scenario, traj)
    v1, v2 = scenario.speeds()
    print(f"solver = {scenario.solver}, N = {scenario.grid}, v1 = {fmt(v1)}, v2 = {fmt(v2)}")
    print(f"epsilon = {fmt(epsilon_of(scenario.params, scenario.R, scenario.n))}, "
          f"lambda*h_c = {fmt(lambda_of(scenario.params, scenario.R, scenario.n) * scenario.params.hc)}")
    sys.stdout.write(report.summary())


def cmd_compare(args, out):
    if args.files:
        a, b = (read_snapshot(f) for f in args.files)
        label = "files"
    else:
        scenario = _scenario_from_args(args)
        solvers = args.solvers or ["fd", "spectral"]
        a = _run(replace(scenario, solver=solvers[0]), solvers[0])[-1]
        b = _run(replace(scenario, solver=solvers[1]), solvers[1])[-1]
        label = f"{solvers[0]} vs {solvers[1]}"
    try:
        norms = diagnostics.compare(a, b)
    except AptRingsError as exc:
        raise ConfigError(str(exc)) from None
    rel = diagnostics.max_relative_linf(a, b)
    _write(out / "compare.csv", diagnostics.compare_csv(norms, [label, f"t_s = {fmt(b.time)}"]))
    print(f"{label}: max relative L-inf = {fmt(rel)}")


def cmd_detune_sweep(args, out):
    scenario = _scenario_from_args(args)
    if scenario.v is not None or scenario.v1 is not None:
        raise ConfigError("detune-sweep sets the speeds itself; drop v/v1/v2")
    if args.steps < 2:
        raise ConfigError(f"--steps must be at least 2, got {args.steps}")
    rows = []
    for dv in np.linspace(args.dv_min, args.dv_max, args.steps):
        traj = _run(replace(scenario, dv=float(dv), solver="spectral"), "spectral")
        est = diagnostics.drift_velocity(traj, abs(scenario.n))
        rows.append((dv, est.speed, est.residual, est.ring1, est.ring2))
    header = ("dv_mm_per_s", "drift_mm_per_s", "drift_residual_rad", "drift_ring1_mm_per_s", "drift_ring2_mm_per_s")
    comments = [f"R_mm = {fmt(scenario.R)}", f"v_ep_mm_per_s = {fmt(scenario.v_ep)}", f"ic = {scenario.ic}"]
    _write(out / "detune_sweep.csv", write_rows(header, rows, comments))
    for row in rows:
        print(f"dv = {fmt(row[0])}  drift = {fmt(row[1])}")


# ---------------------------------------------------------------------------
# parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(p):
    p.add_argument("--config", help="key = value file with parameters and scenario keys")
    p.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or ./aptrings-output)")


def _add_scenario(p):
    p.add_argument("--radius-mm", dest="radius_mm", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--v", type=float, help="symmetric speed for both rings [mm/s]")
    p.add_argument("--v1", type=float, help="ring 1 speed along +x [mm/s]")
    p.add_argument("--v2", type=float, help="ring 2 speed along -x [mm/s]")
    p.add_argument("--dv", type=float, help="detuning: v1 = v_EP + dv, v2 = v_EP - dv")
    p.add_argument("--ic", choices=IC_KINDS + ("samples",))
    p.add_argument("--samples", help="snapshot CSV used when --ic samples")
    p.add_argument("--solver", choices=SOLVERS)
    p.add_argument("--grid", type=int)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--frames", type=int)
    p.add_argument("--A", type=float)
    p.add_argument("--T0", type=float)


def build_parser():
    parser = _Parser(prog="aptrings", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("spectrum", help="eigenfrequency sweep over the tangential speed")
    _add_common(p)
    p.add_argument("--radius-mm", dest="radius_mm", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--v-min", dest="v_min", type=float, default=0.0)
    p.add_argument("--v-max", dest="v_max", type=float)
    p.add_argument("--steps", type=int, default=1001)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("ep-window", help="epsilon and radius windows of the unbroken phase")
    _add_common(p)
    p.add_argument("--n", type=int)
    p.set_defaults(func=cmd_ep_window)

    p = sub.add_parser("closed-form", help="closed-form EP profiles and phase bookkeeping")
    _add_common(p)
    p.add_argument("--radius-mm", dest="radius_mm", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--A", type=float)
    p.add_argument("--points", type=int, default=1025)
    p.set_defaults(func=cmd_closed_form)

    p = sub.add_parser("simulate", help="run one solver and extract observables")
    _add_common(p)
    _add_scenario(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="compare two solvers or two snapshot files")
    _add_common(p)
    _add_scenario(p)
    p.add_argument("--files", nargs=2, metavar=("A", "B"))
    p.add_argument("--solvers", nargs=2, choices=SOLVERS)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("detune-sweep", help="drift velocity against detuning dv")
    _add_common(p)
    _add_scenario(p)
    p.add_argument("--dv-min", dest="dv_min", type=float, default=0.0)
    p.add_argument("--dv-max", dest="dv_max", type=float, default=0.4)
    p.add_argument("--steps", type=int, default=5)
    p.set_defaults(func=cmd_detune_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = _outdir(args)
        args.func(args, out)
    except (NumericalError, SingularityError) as exc:
        print(f"aptrings: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (AptRingsError, OSError) as exc:
        print(f"aptrings: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

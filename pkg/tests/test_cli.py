import math

import numpy as np
import pytest

from aptrings.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, OUTPUT_ENV, load_config, main
from aptrings.fields import read_snapshot
from aptrings.params import format_params_file, reference_params
from aptrings._csv import read_rows

PARAMS_TEXT = format_params_file(reference_params())


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = main([argv[0], "--out", str(out), *argv[1:]])
    return code, out


def table(path):
    _, header, rows = read_rows(path.read_text())
    return header, rows


def test_spectrum_bifurcation(tmp_path):
    code, out = run(tmp_path, "spectrum", "--radius-mm", "21", "--n", "1", "--v-max", "8.4", "--steps", "201")
    assert code == EXIT_OK
    header, rows = table(out / "spectrum.csv")
    v = np.array([float(r[0]) for r in rows])
    phases = [r[-1] for r in rows]
    first = phases.index("MOVING")
    assert abs(v[first] - 4.2) <= (v[1] - v[0])
    assert set(phases[: first - 1]) == {"STATIC"}


@pytest.mark.parametrize("steps", ["1", "0"])
def test_spectrum_rejects_steps(tmp_path, steps):
    code, _ = run(tmp_path, "spectrum", "--steps", steps)
    assert code == EXIT_USAGE


def test_bad_flag_value_is_usage_error(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["spectrum", "--steps", "many"])
    assert exc.value.code == EXIT_USAGE


def window_values(path):
    return dict(
        (k.strip(), float(v)) for k, v in (l.split("=") for l in path.read_text().splitlines()) if k.strip().startswith("R_")
    )


def test_ep_window(tmp_path, capsys):
    code, out = run(tmp_path, "ep-window")
    assert code == EXIT_OK
    w1 = window_values(out / "ep_window.txt")
    assert w1["R_lo_mm"] == pytest.approx(20.0, rel=1e-12)
    assert w1["R_hi_mm"] == pytest.approx(22.360680, abs=1e-6)
    code, out3 = run(tmp_path, "ep-window", "--n", "3", name="n3")
    w3 = window_values(out3 / "ep_window.txt")
    assert w3["R_lo_mm"] == pytest.approx(3 * w1["R_lo_mm"], rel=1e-12)
    assert w3["R_hi_mm"] == pytest.approx(3 * w1["R_hi_mm"], rel=1e-12)


def test_ep_window_missing_D(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("\n".join(l for l in PARAMS_TEXT.splitlines() if not l.startswith("D ")))
    code, _ = run(tmp_path, "ep-window", "--config", str(cfg))
    assert code == EXIT_USAGE


def test_closed_form(tmp_path):
    code, out = run(tmp_path, "closed-form", "--points", "257")
    assert code == EXIT_OK
    header, rows = table(out / "closed_form.csv")
    assert len(rows) == 257
    summary = (out / "closed_form_summary.txt").read_text()
    assert "phi" in summary


def test_simulate_ep_recipe(tmp_path, capsys):
    code, out = run(tmp_path, "simulate", "--v", "4.2", "--grid", "64", "--frames", "20")
    assert code == EXIT_OK
    header, rows = table(out / "observables.csv")
    rec = dict(zip(header, rows[0]))
    assert float(rec["secular_decay_rate"]) == pytest.approx(0.4268, rel=1e-2)
    lag = float(rec["phase_lag_final"])
    assert 0 < lag < math.pi / 2
    snaps = sorted(out.glob("snapshot_*.csv"))
    assert len(snaps) == 21
    last = read_snapshot(snaps[-1])
    assert last.time == pytest.approx(10.0)


def test_simulate_detuned_drift(tmp_path):
    code, out = run(tmp_path, "simulate", "--dv", "0.2", "--grid", "64", "--frames", "20")
    assert code == EXIT_OK
    header, rows = table(out / "observables.csv")
    rec = dict(zip(header, rows[0]))
    assert float(rec["drift_velocity"]) == pytest.approx(0.2, rel=2e-2)


def test_simulate_fd_coarse_grid_refused(tmp_path):
    code, _ = run(tmp_path, "simulate", "--solver", "fd", "--grid", "8")
    assert code == EXIT_USAGE


def test_two_speed_forms_refused(tmp_path):
    code, _ = run(tmp_path, "simulate", "--v", "4.2", "--dv", "0.1")
    assert code == EXIT_USAGE


def test_numerical_failure_exit_code(tmp_path):
    # a zero-amplitude start leaves nothing to fit
    code, _ = run(tmp_path, "simulate", "--A", "0", "--grid", "32", "--frames", "10")
    assert code == EXIT_NUMERICAL


def test_compare_solvers(tmp_path, capsys):
    code, out = run(tmp_path, "compare", "--grid", "128", "--v", "4.2")
    assert code == EXIT_OK
    header, rows = table(out / "compare.csv")
    assert [r[0] for r in rows] == ["T1", "T2"]
    assert max(float(r[4]) for r in rows) <= 2e-3


def test_compare_same_solver_is_zero(tmp_path):
    code, out = run(tmp_path, "compare", "--grid", "32", "--solvers", "spectral", "spectral")
    assert code == EXIT_OK
    _, rows = table(out / "compare.csv")
    assert all(float(x) == 0.0 for r in rows for x in r[1:])


def test_compare_files_grid_mismatch(tmp_path):
    _, a = run(tmp_path, "simulate", "--grid", "32", "--frames", "10", name="a")
    _, b = run(tmp_path, "simulate", "--grid", "64", "--frames", "10", name="b")
    code, _ = run(tmp_path, "compare", "--files", str(a / "snapshot_10.csv"), str(b / "snapshot_10.csv"), name="c")
    assert code == EXIT_USAGE


def test_detune_sweep(tmp_path):
    code, out = run(tmp_path, "detune-sweep", "--grid", "32", "--frames", "20", "--steps", "3")
    assert code == EXIT_OK
    _, rows = table(out / "detune_sweep.csv")
    for r in rows:
        dv, drift = float(r[0]), float(r[1])
        assert drift == pytest.approx(dv, abs=1e-9 + 2e-2 * abs(dv))


def test_output_root_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env-root"))
    assert main(["ep-window"]) == EXIT_OK
    assert (tmp_path / "env-root" / "ep_window.txt").exists()


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "scenario.cfg"
    cfg.write_text(PARAMS_TEXT + "R = 21\nv = 3.0\ngrid = 32\nframes = 10\nt_end = 4\n")
    params, values = load_config(cfg)
    assert params.hc == pytest.approx(0.2) and values["v"] == 3.0
    code, out = run(tmp_path, "simulate", "--config", str(cfg), "--dv", "0.2", "--t-end", "5")
    assert code == EXIT_OK
    header, rows = table(out / "observables.csv")
    assert float(dict(zip(header, rows[0]))["drift_velocity"]) == pytest.approx(0.2, rel=2e-2)
    snaps = sorted(out.glob("snapshot_*.csv"))
    assert read_snapshot(snaps[-1]).time == pytest.approx(5.0)


def test_config_without_params_refused(tmp_path):
    cfg = tmp_path / "scenario.cfg"
    cfg.write_text("R = 21\n")
    code, _ = run(tmp_path, "simulate", "--config", str(cfg))
    assert code == EXIT_USAGE


COMMANDS = [
    ["spectrum", "--steps", "51"],
    ["ep-window"],
    ["closed-form", "--points", "129"],
    ["simulate", "--grid", "32", "--frames", "10"],
    ["compare", "--grid", "32", "--frames", "10"],
    ["detune-sweep", "--grid", "32", "--frames", "10", "--steps", "2"],
]


@pytest.mark.parametrize("argv", COMMANDS, ids=[c[0] for c in COMMANDS])
def test_deterministic_output(tmp_path, argv):
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert main([argv[0], "--out", str(a), *argv[1:]]) == EXIT_OK
    assert main([argv[0], "--out", str(b), *argv[1:]]) == EXIT_OK
    files_a = sorted(p.name for p in a.iterdir())
    assert files_a == sorted(p.name for p in b.iterdir()) and files_a
    for name in files_a:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name

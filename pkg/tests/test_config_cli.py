"""Config parsing, snapshot files, experiment drivers, and the CLI."""

import json
import math

import numpy as np
import pytest

from burgers2d.cli import main
from burgers2d.config import (ConfigError, apply_env_overrides, parse_config,
                              render)
from burgers2d.core import CellField, build_grid
from burgers2d.data import Profile1D
from burgers2d.diagnostics import DiagnosticSpec, DiagnosticsReport
from burgers2d.experiments import emit_plot_data, execute, report_csv_text
from burgers2d.selfsim import VSSParams, shock_locus
from burgers2d.snapshots import read_snapshot, write_snapshot

RUN_CFG = """\
[experiment]
name = run
seed = 3

[grid]
x1_min = -1.2
x1_max = 1.2
x2_min = -0.4
x2_max = 1.6
n1 = 40
n2 = 36

[datum]
kind = bump
M = 0.5
c2 = 0.5
w1 = 0.4
w2 = 0.35

[scheme]
cfl = 0.5
t_end = 0.1
"""


def _synthetic_report(times, records, **spec_kw):
    return DiagnosticsReport(np.asarray(times, dtype=float), records,
                             DiagnosticSpec(**spec_kw))


# ------------------------------------------------------------- parsing

def test_parse_minimal_defaults():
    """An empty experiment section yields the documented defaults."""
    cfg = parse_config("[experiment]\nname = run\n")
    assert cfg.experiment == "run"
    assert cfg.seed == 0
    assert cfg.grid["n1"] == 128 and cfg.grid["n2"] == 128
    assert cfg.grid["boundary"] == "outflow"
    assert cfg.datum["kind"] == "dirac"
    assert cfg.scheme["cfl"] == 0.5 and cfg.scheme["t_end"] == 1.0
    assert cfg.sweep["m_list"] == (8, 16, 32)
    assert cfg.diagnostics["support_threshold"] is None


def test_parse_overrides_and_comments():
    text = ("# laboratory run\n[experiment]\nname = run\nseed = 7\n\n"
            "[grid]\nn1 = 256  # fine\nx1_min = -2.5\nx1_max = 2.5\n")
    cfg = parse_config(text)
    assert cfg.seed == 7
    assert cfg.grid["n1"] == 256
    assert cfg.grid["x1_min"] == -2.5
    assert cfg.grid["n2"] == 128  # untouched default


def test_parse_rejects_cfl_above_one():
    with pytest.raises(ConfigError, match="scheme"):
        parse_config("[experiment]\nname = run\n[scheme]\ncfl = 1.5\n")


def test_parse_bad_value_reports_line():
    with pytest.raises(ConfigError, match="line 4"):
        parse_config("[experiment]\nname = run\n[scheme]\ncfl = banana\n")


def test_parse_unknown_key_lists_known_ones():
    with pytest.raises(ConfigError, match="line 2.*unknown key.*n1"):
        parse_config("[grid]\nresolution = 64\n")


def test_parse_unknown_section():
    with pytest.raises(ConfigError, match=r"line 1: unknown section"):
        parse_config("[mesh]\nn1 = 64\n")


def test_parse_key_outside_section():
    with pytest.raises(ConfigError, match="outside any"):
        parse_config("n1 = 64\n")


def test_parse_missing_equals():
    with pytest.raises(ConfigError, match="expected key = value"):
        parse_config("[grid]\nn1 64\n")


def test_parse_unknown_experiment_suggests_names():
    with pytest.raises(ConfigError, match="did you mean one of.*run.*sweep"):
        parse_config("[experiment]\nname = warp\n")


def test_parse_rejects_bad_output_format():
    with pytest.raises(ConfigError, match="csv|raw"):
        parse_config("[experiment]\nname = run\n[output]\nformat = hdf5\n")


# ---------------------------------------------------------- round trips

def test_render_round_trip_defaults():
    cfg = parse_config("[experiment]\nname = run\n")
    assert parse_config(render(cfg)) == cfg


def test_render_round_trip_custom():
    """Tuples, optional floats, and awkward float reprs all survive."""
    cfg = parse_config(RUN_CFG)
    cfg.scheme["t_end"] = 0.4
    cfg.scheme["snapshots"] = (1e-3, 0.1, 0.30000000000000004)
    cfg.scheme["dt_max"] = 0.07
    cfg.diagnostics["support_threshold"] = 1e-6
    cfg.grid["boundary"] = "periodic"
    assert parse_config(render(cfg)) == cfg


def test_env_overrides_applied_and_reported():
    cfg = parse_config(RUN_CFG)
    applied = apply_env_overrides(cfg, environ={"BURG2D_GRID_N1": "48",
                                                "BURG2D_SCHEME_CFL": "0.9"})
    assert ("grid", "n1", 48) in applied
    assert ("scheme", "cfl", 0.9) in applied
    assert cfg.grid["n1"] == 48 and cfg.scheme["cfl"] == 0.9


def test_env_override_bad_value_rejected():
    cfg = parse_config(RUN_CFG)
    with pytest.raises(ConfigError, match="env BURG2D_GRID_N1"):
        apply_env_overrides(cfg, environ={"BURG2D_GRID_N1": "many"})


def test_env_override_still_validated():
    cfg = parse_config(RUN_CFG)
    with pytest.raises(ConfigError, match="scheme"):
        apply_env_overrides(cfg, environ={"BURG2D_SCHEME_CFL": "1.5"})


# ------------------------------------------------------------ snapshots

def _random_field(seed=0):
    grid = build_grid(((-0.3, 1.1), (0.0, 0.7)), (8, 5))
    rng = np.random.default_rng(seed)
    return CellField(grid, rng.standard_normal((8, 5)), time=0.3)


def test_snapshot_text_round_trip_exact(tmp_path):
    """17 significant digits reproduce every float64 value exactly."""
    f = _random_field()
    write_snapshot(tmp_path / "s.dat", f, mode="text")
    g = read_snapshot(tmp_path / "s.dat")
    np.testing.assert_array_equal(g.values, f.values)
    assert g.time == f.time
    assert g.grid.n1 == 8 and g.grid.n2 == 5
    assert g.grid.h1 == f.grid.h1 and g.grid.x2_min == f.grid.x2_min


def test_snapshot_raw_round_trip_exact(tmp_path):
    f = _random_field(seed=5)
    write_snapshot(tmp_path / "s.dat", f, mode="raw")
    g = read_snapshot(tmp_path / "s.dat")
    np.testing.assert_array_equal(g.values, f.values)
    assert g.time == f.time


def test_snapshot_rejects_corrupt_magic(tmp_path):
    write_snapshot(tmp_path / "s.dat", _random_field(), mode="text")
    blob = (tmp_path / "s.dat").read_bytes().replace(b"BURG2D", b"BOGUS1")
    (tmp_path / "bad.dat").write_bytes(blob)
    with pytest.raises(ValueError):
        read_snapshot(tmp_path / "bad.dat")


def test_snapshot_rejects_truncated_raw(tmp_path):
    write_snapshot(tmp_path / "s.dat", _random_field(), mode="raw")
    blob = (tmp_path / "s.dat").read_bytes()
    (tmp_path / "cut.dat").write_bytes(blob[:-16])
    with pytest.raises(ValueError):
        read_snapshot(tmp_path / "cut.dat")


# ----------------------------------------------------------- experiments

def test_execute_run_artifacts(tmp_path):
    """A run writes the report table, snapshots, and a summary that passes."""
    cfg = parse_config(RUN_CFG)
    summary = execute(cfg, tmp_path)
    header = (tmp_path / "report.csv").read_text().splitlines()[0]
    assert header == "t,mass,l1,l2,linf,supp_min,supp_max,Iq_2,Malpha_4,entropy_max"
    assert (tmp_path / "snapshot_000.dat").exists()
    assert (tmp_path / "snapshot_001.dat").exists()  # initial + final by default
    assert summary["ok"] and summary["experiment"] == "run"
    assert summary["final_time"] == pytest.approx(0.1)
    saved = json.loads((tmp_path / "summary.json").read_text())
    assert saved["ok"] is True


def test_execute_rerun_byte_identical(tmp_path):
    cfg1 = parse_config(RUN_CFG)
    cfg2 = parse_config(RUN_CFG)
    execute(cfg1, tmp_path / "a")
    execute(cfg2, tmp_path / "b")
    for name in ("report.csv", "snapshot_000.dat", "snapshot_001.dat",
                 "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == \
               (tmp_path / "b" / name).read_bytes()


def test_execute_sweep_members_and_table(tmp_path):
    cfg = parse_config(
        "[experiment]\nname = sweep\n"
        "[grid]\nx1_min = -2.5\nx1_max = 2.5\nx2_min = -0.3\nx2_max = 3.5\n"
        "n1 = 128\nn2 = 96\n"
        "[scheme]\nt_end = 1\n[sweep]\nm_list = 8,16\n")
    summary = execute(cfg, tmp_path)
    assert (tmp_path / "report_m8.csv").exists()
    assert (tmp_path / "report_m16.csv").exists()
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "m,mass_final,linf_final,Malpha_4_final"
    assert len(lines) == 3
    assert [int(row.split(",")[0]) for row in lines[1:]] == [8, 16]
    assert summary["ok"]


def test_execute_semigroup_small(tmp_path):
    cfg = parse_config("[experiment]\nname = semigroup\n[grid]\nn1 = 48\n"
                       "n2 = 48\n[scheme]\nt_end = 0.15\n")
    summary = execute(cfg, tmp_path)
    names = [v["name"] for v in summary["verdicts"]]
    assert names == ["contraction_margin", "comparison_margin", "mass_margin"]
    assert summary["ok"]
    assert len((tmp_path / "margins.csv").read_text().splitlines()) == 11


def test_execute_selfsim_defaults(tmp_path):
    cfg = parse_config("[experiment]\nname = selfsim\n[selfsim]\nn_starts = 20\n")
    summary = execute(cfg, tmp_path)
    assert summary["ok"]
    names = [v["name"] for v in summary["verdicts"]]
    for expected in ("characteristic_drift", "vss_implicit_residual",
                     "reduced_ode_halving_ratio", "locus_relation_residual"):
        assert expected in names
    assert (tmp_path / "characteristics.csv").exists()
    assert (tmp_path / "locus_branch0.csv").exists()


def test_execute_validate_orders(tmp_path):
    """Refinement at 32/64/128 already meets both convergence targets."""
    cfg = parse_config("[experiment]\nname = validate\n[grid]\nn1 = 128\n")
    summary = execute(cfg, tmp_path)
    assert summary["ok"]
    for fname in ("convergence_nwave.csv", "convergence_vss.csv"):
        lines = (tmp_path / fname).read_text().splitlines()
        assert lines[0] == "n,l1_err,order"
        errs = [float(r.split(",")[1]) for r in lines[1:]]
        assert errs == sorted(errs, reverse=True)


def test_execute_calibrate_structure(tmp_path):
    """Calibration emits the constant files; stability needs finer grids."""
    cfg = parse_config("[experiment]\nname = calibrate\n[grid]\nn1 = 64\n")
    summary = execute(cfg, tmp_path)
    consts = json.loads((tmp_path / "constants.json").read_text())
    assert consts["c_infty"] > 0
    assert summary["c_infty"] == consts["c_infty"]
    rows = (tmp_path / "calibration.csv").read_text().splitlines()
    assert rows[0] == "family,resolution,n1,c_hat,boundary_touched"
    assert len(rows) == 7  # three families at two resolutions
    for v in summary["verdicts"]:
        assert v["status"] in ("pass", "fail", "hypothesis-unmet")


# ------------------------------------------------------------ plot data

def test_emit_decay_with_fit(tmp_path):
    times = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0]
    recs = [{"linf": 5.0 if t == 0 else 3.0 * t ** -0.5} for t in times]
    report = _synthetic_report(times, recs)
    written = emit_plot_data(report, "decay", tmp_path, mass=1.0)
    assert {p.name for p in written} == {"decay.csv", "decay_fit.csv"}
    data = np.loadtxt(tmp_path / "decay_fit.csv", delimiter=",", skiprows=1)
    slope = np.polyfit(np.log(data[:, 0]), np.log(data[:, 1]), 1)[0]
    assert slope == pytest.approx(-0.5, abs=1e-10)


def test_emit_decay_unavailable_without_positive_times(tmp_path):
    report = _synthetic_report([0.0], [{"linf": 1.0}])
    with pytest.raises(ValueError, match="series unavailable"):
        emit_plot_data(report, "decay", tmp_path)


def test_emit_support_unavailable_when_never_detected(tmp_path):
    report = _synthetic_report([0.0, 1.0], [{"support_x1": None}] * 2)
    with pytest.raises(ValueError, match="series unavailable"):
        emit_plot_data(report, "support", tmp_path)


def test_emit_moment_series_per_column(tmp_path):
    times = [0.0, 1.0, 2.0]
    recs = [{"Iq_2": 1.0 + t, "Malpha_4": 2.0 * t} for t in times]
    written = emit_plot_data(_synthetic_report(times, recs), "moments", tmp_path)
    assert {p.name for p in written} == {"moment_Iq_2.csv", "moment_Malpha_4.csv"}
    data = np.loadtxt(tmp_path / "moment_Iq_2.csv", delimiter=",", skiprows=1)
    np.testing.assert_allclose(data[:, 1], [1.0, 2.0, 3.0])


def test_emit_profile_from_cells(tmp_path):
    prof = Profile1D("cells", edges=np.array([0.0, 0.5, 1.0, 1.5]),
                     values=np.array([2.0, 0.0, 1.0]))
    emit_plot_data(None, "profile", tmp_path, profile=prof)
    data = np.loadtxt(tmp_path / "profile.csv", delimiter=",", skiprows=1)
    np.testing.assert_allclose(data[:, 0], [0.25, 0.75, 1.25])
    np.testing.assert_allclose(data[:, 1], [2.0, 0.0, 1.0])


def test_emit_locus_matches_curves(tmp_path):
    curves = shock_locus(VSSParams(4.0 / 3.0), np.linspace(0.5, 2.0, 40),
                         1.0 / 3.0)
    emit_plot_data(None, "locus", tmp_path, curves=curves)
    for curve in curves:
        data = np.loadtxt(tmp_path / f"locus_branch{curve.branch}.csv",
                          delimiter=",", skiprows=1, ndmin=2)
        keep = ~curve.gaps
        assert data.shape[0] == int(np.sum(keep))
        np.testing.assert_allclose(data[:, 0], curve.y1[keep], rtol=1e-15)
        np.testing.assert_allclose(data[:, 1], curve.y2[keep], rtol=1e-15)


def test_emit_unknown_kind_rejected(tmp_path):
    with pytest.raises(ValueError, match="unknown plot kind"):
        emit_plot_data(_synthetic_report([1.0], [{"linf": 1.0}]), "spectrum",
                       tmp_path)


# ------------------------------------------------------------------ CLI

def _write_cfg(tmp_path, text=RUN_CFG):
    path = tmp_path / "exp.cfg"
    path.write_text(text)
    return str(path)


def test_cli_run_exits_zero(tmp_path, capsys):
    rc = main(["run", "--config", _write_cfg(tmp_path),
               "--out", str(tmp_path / "out")])
    out = capsys.readouterr().out
    assert rc == 0
    assert "all checks passed" in out
    assert "[pass]" in out
    assert (tmp_path / "out" / "report.csv").exists()


def test_cli_missing_config_exits_two(tmp_path, capsys):
    rc = main(["run", "--config", str(tmp_path / "absent.cfg"),
               "--out", str(tmp_path / "out")])
    assert rc == 2
    assert "cannot read config" in capsys.readouterr().err


def test_cli_config_error_exits_two(tmp_path, capsys):
    rc = main(["run", "--config", _write_cfg(tmp_path, "[grid]\nzoom = 3\n"),
               "--out", str(tmp_path / "out")])
    assert rc == 2
    assert "config error" in capsys.readouterr().err


def test_cli_subcommand_mismatch_exits_two(tmp_path, capsys):
    rc = main(["sweep", "--config", _write_cfg(tmp_path),
               "--out", str(tmp_path / "out")])
    assert rc == 2
    assert "declares experiment 'run'" in capsys.readouterr().err


def test_cli_jobs_below_one_exits_two(tmp_path, capsys):
    rc = main(["run", "--config", _write_cfg(tmp_path),
               "--out", str(tmp_path / "out"), "--jobs", "0"])
    assert rc == 2
    assert "--jobs" in capsys.readouterr().err


def test_cli_check_failure_exits_one(tmp_path, capsys, monkeypatch):
    """A failed verdict turns into exit code 1 and a CHECK FAILURE line."""
    def fake_execute(cfg, out_dir, fmt=None, jobs=1):
        return {"ok": False, "verdicts": [
            {"name": "forced", "status": "fail", "value": 1.0, "bound": 0.0}]}

    monkeypatch.setattr("burgers2d.cli.execute", fake_execute)
    rc = main(["run", "--config", _write_cfg(tmp_path),
               "--out", str(tmp_path / "out")])
    out = capsys.readouterr().out
    assert rc == 1
    assert "CHECK FAILURE" in out
    assert "[fail] forced" in out


def test_cli_env_override_reported(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("BURG2D_GRID_N1", "48")
    rc = main(["run", "--config", _write_cfg(tmp_path),
               "--out", str(tmp_path / "out")])
    assert rc == 0
    assert "override grid.n1 = 48" in capsys.readouterr().out


def test_cli_format_flag_switches_snapshots(tmp_path):
    rc = main(["run", "--config", _write_cfg(tmp_path),
               "--out", str(tmp_path / "out"), "--format", "raw"])
    assert rc == 0
    head = (tmp_path / "out" / "snapshot_000.dat").read_bytes()[:20]
    assert head.startswith(b"BURG2D v1 raw")
    field = read_snapshot(tmp_path / "out" / "snapshot_000.dat")
    assert math.isfinite(field.mass())

import io
import json
import math

import numpy as np
import pytest

from spinboson import cli
from spinboson.cli import records, svg
from spinboson.cli.units import FLUX_QUBIT_PRESET, convert_units
from spinboson.evolve import TimeSeries
from spinboson.experiments import Peak, ResonanceScan, RisetimeScan
from spinboson.errors import ValidationError
from spinboson.model import DriveSpec, ModelParams, RampProfile


def sbm(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(map(str, argv)), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


# -- exit codes ---------------------------------------------------------------------------

def test_missing_subcommand_is_usage_error():
    code, _, err = sbm()
    assert code == cli.EXIT_USAGE and "usage" in err


def test_missing_required_flag_is_usage_error(tmp_path):
    code, _, err = sbm("resonance-table", "--out-dir", tmp_path)
    assert code == cli.EXIT_USAGE and "--g" in err


def test_unknown_flag_is_usage_error(tmp_path):
    code, _, err = sbm("dynamics", "--g", 0.2, "--bogus", 1, "--out-dir", tmp_path)
    assert code == cli.EXIT_USAGE and "usage" in err


def test_validation_failure_code(tmp_path):
    code, _, err = sbm("dynamics", "--g", -0.2, "--t-end", 1, "--dt", 0.1, "--out-dir", tmp_path)
    assert code == cli.EXIT_VALIDATION and "g must be ≥ 0" in err


def test_inconsistent_measurement_is_validation(tmp_path):
    code, _, _ = sbm("estimate-g", "--measured", -0.3, -0.3, "--out-dir", tmp_path)
    assert code == cli.EXIT_VALIDATION


def test_degraded_scan_is_numerical_failure(tmp_path):
    code, out, _ = sbm("scan-amplitude", "--g", 0.2, "--min", 3.7, "--max", 3.8, "--step", 0.05,
                       "--n-max", 4, "--t-l", 10, "--dt", 0.05, "--out-dir", tmp_path)
    assert code == cli.EXIT_NUMERIC and "DEGRADED" in out


def test_strict_config_rejected(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": {"g": 0.2, "gamma": 1.0}}))
    code, _, err = sbm("dynamics", "--config", cfg, "--out-dir", tmp_path)
    assert code == cli.EXIT_VALIDATION and "gamma" in err


# -- subcommands -----------------------------------------------------------------------------

def test_resonance_table(tmp_path):
    code, out, _ = sbm("resonance-table", "--g", 0.2, "--m-max", 4, "--out-dir", tmp_path)
    assert code == 0
    meta, header, rows = records.read_csv((tmp_path / "resonance-table.csv").read_text())
    assert header[:3] == ["m", "amplitude", "predicted_M"]
    assert [float(r[1]) for r in rows] == pytest.approx([1.25, 2.5, 3.75, 5.0])
    assert float(rows[0][2]) == pytest.approx(-0.40622, abs=1e-5)
    assert len(out.splitlines()) == 4


def test_convert_units_preset(tmp_path):
    code, out, _ = sbm("convert-units", "--out-dir", tmp_path)
    assert code == 0
    assert "t_l_ns: computed 8.986 DISAGREES with quoted 11" in out
    assert "t_d_ns: computed 63.66 agrees with quoted 64" in out
    assert "g_over_omega: computed 0.1129 agrees with quoted 0.11" in out


def test_convert_units_values():
    rep = convert_units(2.782, 314.0, 2.5)
    assert rep["t_l_ns"] == pytest.approx(25 / 2.782, rel=1e-12)
    assert rep["t_d_ns"] == pytest.approx(1000 / (2 * math.pi * 2.5), rel=1e-12)
    assert rep["g_over_omega"] == pytest.approx(0.1129, abs=1e-4)
    with pytest.raises(ValidationError):
        convert_units(0.0)


def test_convert_units_physical_flag(tmp_path):
    code, out, _ = sbm("convert-units", "--omega-ghz", 5.0, "--preset", "none", "--out-dir", tmp_path)
    assert code == 0 and "t_l_ns = 5" in out


def test_dynamics_outputs_and_manifest(tmp_path):
    code, out, _ = sbm("dynamics", "--g", 0.2, "--amplitude", 1.25, "--t-end", 6.283185307179586,
                       "--dt", 0.01, "--svg", "--name", "trace", "--out-dir", tmp_path)
    assert code == 0
    series = records.timeseries_from_csv((tmp_path / "trace.csv").read_text())
    assert series.sigma_z[0] == pytest.approx(-math.exp(-0.08), abs=1e-12)
    assert series.sigma_z[-1] == pytest.approx(-math.exp(-0.08), abs=1e-9)
    man = json.loads((tmp_path / "trace.manifest.json").read_text())
    assert man["subcommand"] == "dynamics" and man["config"]["model"]["g"] == 0.2
    assert set(man) >= {"seed", "version", "outputs", "duration_s", "options"}
    assert (tmp_path / "trace.svg").read_text().startswith("<svg")


def test_replay_is_byte_identical(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    code, _, _ = sbm("scan-amplitude", "--g", 0.2, "--min", 1.2, "--max", 1.3, "--step", 0.01,
                     "--t-l", 20, "--initial", "random", "--seed", 11, "--out-dir", first)
    assert code == 0
    code, _, _ = sbm("replay", first / "scan-amplitude.manifest.json", "--out-dir", second)
    assert code == 0
    assert (first / "scan-amplitude.csv").read_bytes() == (second / "scan-amplitude.csv").read_bytes()


def test_env_seed_and_flag_precedence(tmp_path, monkeypatch):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": {"g": 0.2}, "numerics": {"seed": 1, "dt": 0.1, "t_end": 1.0}}))
    monkeypatch.setenv("SBM_SEED", "5")
    sbm("dynamics", "--config", cfg, "--initial", "random", "--name", "env", "--out-dir", tmp_path)
    assert json.loads((tmp_path / "env.manifest.json").read_text())["seed"] == 5
    sbm("dynamics", "--config", cfg, "--seed", 9, "--initial", "random", "--name", "flag", "--out-dir", tmp_path)
    assert json.loads((tmp_path / "flag.manifest.json").read_text())["seed"] == 9
    a = records.timeseries_from_csv((tmp_path / "env.csv").read_text())
    b = records.timeseries_from_csv((tmp_path / "flag.csv").read_text())
    assert not np.array_equal(a.sigma_z, b.sigma_z)


def test_bad_env_seed(tmp_path, monkeypatch):
    monkeypatch.setenv("SBM_SEED", "abc")
    code, _, _ = sbm("dynamics", "--g", 0.2, "--out-dir", tmp_path)
    assert code == cli.EXIT_VALIDATION


def test_estimate_g_measured(tmp_path):
    code, out, _ = sbm("estimate-g", "--measured", -0.40622, -0.32571, "--out-dir", tmp_path)
    assert code == 0
    assert float(out.split("=")[1]) == pytest.approx(0.2, abs=1e-4)


def test_risetime_cli_small(tmp_path):
    code, _, _ = sbm("scan-risetime", "--g", 0.2, "--m", 1, "--tc", 0, 2, "--t-l", 10, "--dt", 0.01,
                     "--out-dir", tmp_path)
    assert code == 0
    scan = records.risetime_from_csv((tmp_path / "scan-risetime.csv").read_text())
    assert scan.tc_grid.tolist() == [0.0, 2.0] and set(scan.means) == {1}


# -- serialisation -------------------------------------------------------------------------------

def test_timeseries_roundtrip():
    rng = np.random.default_rng(0)
    t = np.linspace(0, 1, 11)
    s = TimeSeries(t, rng.normal(size=11), rng.normal(size=11), np.ones(11), {"model": {"g": 0.2}, "x": [1, 2]})
    back = records.timeseries_from_csv(records.timeseries_to_csv(s))
    for name in ("t", "sigma_z", "sigma_x", "norm"):
        assert np.array_equal(getattr(back, name), getattr(s, name))
    assert back.metadata == s.metadata


def test_scan_roundtrip():
    params = ModelParams(0.2, 0.1, DriveSpec.photon(0.0))
    scan = ResonanceScan(np.array([1.2, 1.25, 1.3]), np.array([-0.01, -0.4062178889381614, 1e-17]), 50 * math.pi,
                         params, [Peak(1.25, -0.4062178889381614, 1)], True, [1.3], {"note": "x"})
    back = records.scan_from_csv(records.scan_to_csv(scan))
    assert np.array_equal(back.grid, scan.grid) and np.array_equal(back.means, scan.means)
    assert (back.t_l, back.params, back.peaks, back.degraded, back.failed_points, back.metadata) == \
        (scan.t_l, scan.params, scan.peaks, scan.degraded, scan.failed_points, scan.metadata)


def test_risetime_roundtrip():
    params = ModelParams(0.2, 0.0, DriveSpec("photon", 0.0, RampProfile(0.0)))
    scan = RisetimeScan(np.array([0.0, 5.0]), {1: np.array([-0.4, -0.1]), 3: np.array([-0.28, 0.02])},
                        params, 50 * math.pi, {"a": 1})
    back = records.risetime_from_csv(records.risetime_to_csv(scan))
    assert back.params == scan.params and back.t_l == scan.t_l and back.metadata == scan.metadata
    assert set(back.means) == {1, 3}
    assert all(np.array_equal(back.means[m], scan.means[m]) for m in scan.means)


def test_svg_is_pure_and_valid():
    x = np.linspace(0, 1, 10000)
    a = svg.line_plot(x, {"y": np.sin(x)}, "t", "x", "y")
    assert a == svg.line_plot(x, {"y": np.sin(x)}, "t", "x", "y")
    assert a.startswith("<svg") and a.rstrip().endswith("</svg>")


def test_preset_values():
    assert FLUX_QUBIT_PRESET["omega_ghz"] == 2.782 and FLUX_QUBIT_PRESET["g_mhz"] == 314.0

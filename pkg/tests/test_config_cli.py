import json
import math
from pathlib import Path

import numpy as np
import pytest

from oisl_radar.cli import main
from oisl_radar.config import ScenarioConfig, apply_override, from_dict, load_config
from oisl_radar.errors import ConfigError
from oisl_radar.io_formats import read_pgm16, write_json, write_pgm16
from oisl_radar.radar_dsp import C

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_defaults_validate():
    cfg = ScenarioConfig().validate()
    assert cfg.drive.detuning == -4e9 and cfg.receiver.adc.rate == 500e6


def test_unknown_key_rejected():
    with pytest.raises(ConfigError):
        from_dict({"receiver": {"adc": {"rat": 1e8}}})
    with pytest.raises(ConfigError):
        from_dict({"bogus": 1})


def test_type_coercion_and_errors():
    cfg = from_dict({"receiver": {"adc": {"bits": "10", "rate": "1e8"}}, "feedback": {"enabled": "false"}})
    assert cfg.receiver.adc.bits == 10 and cfg.receiver.adc.rate == 1e8 and cfg.feedback.enabled is False
    with pytest.raises(ConfigError):
        from_dict({"receiver": {"adc": {"bits": 10.5}}})
    with pytest.raises(ConfigError):
        from_dict({"mode": "spice"})


def test_dotted_overrides():
    cfg = ScenarioConfig()
    apply_override(cfg, "receiver.adc.rate=1e8")
    apply_override(cfg, "drive.chirp.bandwidth=4e9")
    apply_override(cfg, "dsp.window=full")
    apply_override(cfg, 'scene.preset="center"')
    assert cfg.receiver.adc.rate == 1e8
    assert cfg.drive.chirp.bandwidth == 4e9
    assert cfg.dsp.window == "full"
    assert cfg.scene == {"preset": "center"}
    for bad in ("receiver.adc.nope=1", "receiver=1", "noequals", "receiver.adc.bits=abc"):
        with pytest.raises(ConfigError):
            apply_override(cfg, bad)


def test_config_relative_paths_resolve(tmp_path):
    (tmp_path / "scene.json").write_text(json.dumps({"preset": "center"}))
    (tmp_path / "cfg.json").write_text(json.dumps({"scene": "scene.json"}))
    cfg = load_config(tmp_path / "cfg.json")
    assert Path(cfg.scene) == tmp_path / "scene.json"
    (tmp_path / "bad.json").write_text(json.dumps({"drive": {"profile_path": "missing.csv"}}))
    with pytest.raises(ConfigError):
        load_config(tmp_path / "bad.json")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.json")


def test_shipped_configs_load():
    paths = sorted(CONFIGS.glob("*.json"))
    assert len(paths) >= 10
    for p in paths:
        load_config(p)


def test_range_cli_writes_artifacts_and_axis_laws(tmp_path, capsys):
    code, out, _ = _run(capsys, "range", "--config", CONFIGS / "range_single.json", "--out-dir", tmp_path)
    assert code == 0 and out.startswith("range:")
    for name in ("dechirped.csv", "dechirped.json", "profile.csv", "peaks.csv", "report.json"):
        assert (tmp_path / name).exists()
    rep = json.loads((tmp_path / "report.json").read_text())
    B, T = rep["chirp"]["bandwidth_hz"], rep["chirp"]["period_s"]
    assert rep["l_res_m"] == C / (4 * B)
    assert rep["delta_f_min_hz"] == 1 / T
    assert rep["c_res_m"] == "inf"
    prof = np.loadtxt(tmp_path / "profile.csv", delimiter=",", skiprows=1)
    assert np.array_equal(prof[:, 0], C * T * prof[:, 1] / (4 * B))
    assert rep["top_peak_m"] == pytest.approx(0.65, abs=C / (8 * B))
    assert rep["adc_clip_count"] == 0


def test_range_cli_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert _run(capsys, "range", "--config", CONFIGS / "range_dual.json", "--out-dir", d, "--seed", 7)[0] == 0
    for f in sorted(p.name for p in a.iterdir()):
        assert (a / f).read_bytes() == (b / f).read_bytes(), f


def test_seed_changes_noisy_output(tmp_path, capsys):
    for s in (1, 2):
        _run(capsys, "range", "--config", CONFIGS / "range_single.json", "--out-dir", tmp_path / str(s),
             "--seed", s)
    assert (tmp_path / "1" / "dechirped.csv").read_bytes() != (tmp_path / "2" / "dechirped.csv").read_bytes()


def test_three_point_calibration_fails_with_json_error(tmp_path, capsys):
    code, _, err = _run(capsys, "calibrate", "--out-dir", tmp_path, "--set", "drive.xi_start=0.08",
                        "--set", "drive.xi_stop=0.12", "--set", "drive.xi_step=0.02")
    assert code != 0
    rec = json.loads(err.strip().splitlines()[-1])
    assert rec["error"] == "calibration" or "calibration" in rec["error"]
    assert "message" in rec


def test_calibrate_cli_report_and_repeatability(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        code, out, _ = _run(capsys, "calibrate", "--config", CONFIGS / "calibrate_ku.json", "--out-dir", d)
        assert code == 0 and "Hopf onset" in out
    assert (a / "calibration.csv").read_bytes() == (b / "calibration.csv").read_bytes()
    rep = json.loads((a / "report.json").read_text())
    assert rep["f0_min_hz"] <= 15e9 and rep["f0_max_hz"] >= 18e9


def test_unknown_override_is_machine_readable(tmp_path, capsys):
    code, _, err = _run(capsys, "range", "--out-dir", tmp_path, "--set", "receiver.adc.nope=1")
    assert code != 0
    assert json.loads(err)["error"] == ConfigError.code


def test_isar_rejects_ode_mode(tmp_path, capsys):
    code, _, err = _run(capsys, "isar", "--config", CONFIGS / "isar_center.json", "--out-dir", tmp_path,
                        "--mode", "ode")
    assert code != 0 and json.loads(err)["error"] == ConfigError.code


def test_isar_cli_small_aperture(tmp_path, capsys):
    code, out, _ = _run(capsys, "isar", "--config", CONFIGS / "isar_center.json", "--out-dir", tmp_path,
                        "--set", "isar.t_int=2.65e-4")
    assert code == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["n_pulses"] == 100
    assert rep["theta_rad"] == pytest.approx(math.radians(900) * 2.65e-4, rel=1e-12)
    assert rep["c_res_m"] == C / (2 * rep["theta_rad"] * rep["chirp"]["f_center_hz"])
    assert rep["l_res_m"] == C / (4 * rep["chirp"]["bandwidth_hz"])
    img = read_pgm16(tmp_path / "isar.pgm")
    side = json.loads((tmp_path / "isar.json").read_text())
    assert img.shape == (side["height"], side["width"])


def test_pgm_and_json_writers(tmp_path):
    img = np.arange(12, dtype=float).reshape(3, 4)
    p = write_pgm16(tmp_path / "x.pgm", img, {"note": "t"})
    assert p.read_bytes().startswith(b"P5\n4 3\n65535\n")
    back = read_pgm16(p)
    assert back[0, 0] == 0 and back[-1, -1] == 65535
    assert np.all(np.diff(back.ravel().astype(int)) > 0)
    j = write_json(tmp_path / "x.json", {"b": math.inf, "a": np.float64(1.5), "c": [np.int64(2)]})
    assert json.loads(j.read_text()) == {"a": 1.5, "b": "inf", "c": [2]}

import json
import math

import numpy as np
import pytest

from cohscat import cli
from cohscat.scenario import Scenario, SchemaError


def run_cli(args):
    return cli.main(args)


def test_scenario_defaults_and_strictness():
    sc = Scenario.from_dict({})
    params = sc.emitter.resolve()
    assert params.linewidth_uev() == pytest.approx(6.14, abs=1e-9)
    assert sc.seed == 12345
    with pytest.raises(SchemaError):
        Scenario.from_dict({"emitter": {"mystery": 1.0}})
    with pytest.raises(SchemaError):
        Scenario.from_dict({"mystery_block": {}})
    with pytest.raises(SchemaError):
        Scenario.from_dict({"emitter": {"t1_ns": "fast"}})
    with pytest.raises(SchemaError):
        Scenario.from_dict({"seed": -3})
    with pytest.raises(SchemaError):
        Scenario.from_dict({"emitter": {"t1_ns": 1.0}})  # t2 missing


def test_drive_conventions():
    sc = Scenario.from_dict({"drive": {"rabi_ghz": 0.83}})
    conv = sc.drive.conventions()
    assert conv["angular_rad_ns"] == pytest.approx(2.0 * math.pi * 0.83)
    assert conv["direct_rad_ns"] == pytest.approx(0.83)
    assert sc.drive.resolve() == pytest.approx(2.0 * math.pi * 0.83)
    sc2 = Scenario.from_dict({"drive": {"rabi_rad_ns": 1.5}})
    assert sc2.drive.resolve() == 1.5


def test_fig2c_columns_and_max(tmp_path):
    out = tmp_path / "o"
    assert run_cli(["fig", "fig2c", "--out", str(out)]) == 0
    lines = (out / "fig2c.csv").read_text().splitlines()
    assert lines[0] == "rabi_ghz,i_total_norm,rrs_frac_ratio1.0,rrs_frac_ratio0.3"
    data = np.loadtxt(out / "fig2c.csv", delimiter=",", skiprows=1)
    assert data[:, 3].max() == pytest.approx(0.30, abs=1e-12)
    assert data[:, 2].max() == pytest.approx(1.0, abs=1e-12)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["artifact"] == "cohscat"
    assert manifest["command"] == "fig fig2c"
    assert manifest["scenario"]["seed"] == 12345
    assert (out / "fig2c.svg").exists()


def test_steady_prints_both_conventions(tmp_path, capsys):
    out = tmp_path / "o"
    assert run_cli(["sim", "steady", "--rabi-ghz", "0.83", "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "angular_rad_ns" in printed and "direct_rad_ns" in printed
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["results"]) == {"angular_rad_ns", "direct_rad_ns"}
    lines = (out / "steady.csv").read_text().splitlines()
    assert lines[0] == "convention,omega_rad_ns,s,rho_ee,rrs_fraction"
    assert len(lines) == 3


def test_g2_csv_columns(tmp_path):
    out = tmp_path / "o"
    assert run_cli(["sim", "g2", "--tau-max", "10", "--out", str(out)]) == 0
    lines = (out / "g2.csv").read_text().splitlines()
    assert lines[0] == "tau_ns,g2"


def test_stream_byte_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        code = run_cli(
            ["sim", "stream", "--pairs", "5000", "--seed", "7", "--threads", "1", "--out", str(out)]
        )
        assert code == 0
    assert (a / "stream.csv").read_bytes() == (b / "stream.csv").read_bytes()
    assert (a / "stream.csv.json").read_bytes() == (b / "stream.csv.json").read_bytes()


def test_manifest_roundtrip(tmp_path):
    a = tmp_path / "a"
    assert run_cli(["sim", "stream", "--pairs", "2000", "--seed", "3",
                    "--threads", "1", "--out", str(a)]) == 0
    b = tmp_path / "b"
    assert run_cli(["sim", "stream", "--config", str(a / "manifest.json"),
                    "--threads", "1", "--out", str(b)]) == 0
    assert (a / "stream.csv").read_bytes() == (b / "stream.csv").read_bytes()


def test_schema_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"emitter": {"bogus": 1}}')
    assert run_cli(["fig", "fig2c", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "bogus" in capsys.readouterr().err


def test_numerical_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "zero.json"
    cfg.write_text('{"drive": {"rabi_ghz": 0.0}}')
    assert run_cli(["sim", "g2", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_unknown_flag_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        run_cli(["sim", "g2", "--no-such-flag"])
    assert exc.value.code == 2


def test_fig3d_reports_unit_visibility(tmp_path, capsys):
    out = tmp_path / "o"
    assert run_cli(["fig", "fig3d", "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "visibility 1.0000" in printed
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["results"]["visibility"] == pytest.approx(1.0, abs=1e-6)
    lines = (out / "fig3d.csv").read_text().splitlines()
    assert lines[0] == "phi_rad,p_out0,p_out1,p_coincidence"


def test_fig3e_frequency_ratio(tmp_path):
    out = tmp_path / "o"
    assert run_cli(["fig", "fig3e", "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["results"]["frequency_ratio"] == pytest.approx(2.0, abs=0.02)
    assert manifest["results"]["coincidence_min"] > 0.0


def test_noon_export_and_circuit_solver(tmp_path):
    out = tmp_path / "o"
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"circuit": {"single_visibility": 0.98}}))
    assert run_cli(["sim", "noon", "--input", "single", "--config", str(cfg),
                    "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["results"]["visibility"] == pytest.approx(0.98, abs=0.005)
    assert manifest["results"]["r1"] == manifest["results"]["r2"]


def test_threads_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("COHSCAT_THREADS", "2")
    out = tmp_path / "o"
    assert run_cli(["sim", "stream", "--pairs", "1000", "--seed", "5", "--out", str(out)]) == 0
    meta = json.loads((out / "stream.csv.json").read_text())
    assert meta["workers"] == 2
    monkeypatch.setenv("COHSCAT_THREADS", "nope")
    assert run_cli(["sim", "stream", "--pairs", "10", "--out", str(out)]) == 2

"""CLI contract: commands, exit codes, and output stability."""

import json

import pytest

from qutricav.cli import main

REFERENCE_CFG = (
    "g1 = 100 MHz\ng2 = 100 MHz\nOmega10 = 100 MHz\nOmega21 = 100 MHz\n"
    "tau_d = 1.5 ns\nT = 30 us\nkappa_inv = 2.5 us\n"
)


def test_verify_passes(capsys):
    assert main(["verify"]) == 0
    out = capsys.readouterr().out
    assert "all checks passed" in out
    assert "seed = 42" in out


def test_verify_json(capsys):
    assert main(["verify", "--json", "--seed", "7"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["passed"] is True
    assert payload["seed"] == 7
    assert all(c["error"] <= c["limit"] for c in payload["checks"])


def test_verify_fault_injection_fails(capsys):
    assert main(["verify", "--inject-fault", "stage7-pulse-drop"]) == 1
    out = capsys.readouterr().out
    assert "FAIL" in out


def test_ideal_equal_weights(capsys):
    code = main(["ideal", "--alpha", "0.577", "--beta", "0.577", "--gamma", "0.577"])
    assert code == 0
    out = capsys.readouterr().out
    assert "overlap with entangled target: 1.000000" in out
    assert "cavity vacuum population:      1.0000000000" in out


def test_ideal_alpha_only(capsys):
    assert main(["ideal", "--alpha", "1", "--beta", "0", "--gamma", "0"]) == 0
    out = capsys.readouterr().out
    assert "|000>" in out and "|110>" not in out


def test_ideal_generic_weights(capsys):
    assert main(["ideal", "--alpha", "0.6", "--beta", "0.48", "--gamma", "0.64"]) == 0
    out = capsys.readouterr().out
    assert "|000>  +0.6000000000" in out
    assert "|110>  +0.4800000000" in out
    assert "|220>  +0.6400000000" in out


def test_ideal_rejects_zero_weights(capsys):
    assert main(["ideal", "--alpha", "0", "--beta", "0", "--gamma", "0"]) == 2
    assert main(["ideal", "--alpha", "x", "--beta", "0", "--gamma", "0"]) == 2


def test_evolve_reference_point(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(REFERENCE_CFG)
    out_path = tmp_path / "record.json"
    code = main(["evolve", "--config", str(cfg), "--out", str(out_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "fidelity = 0.99" in out
    record = json.loads(out_path.read_text())
    assert record["fidelity"] == pytest.approx(0.9962372174, abs=1e-7)
    assert record["physicality"]["worst_trace_error"] < 1e-8


def test_evolve_zero_rate_limit(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("T = 1000000 us\nkappa_inv = 1000000 us\n")
    assert main(["evolve", "--config", str(cfg), "--out",
                 str(tmp_path / "r.json")]) == 0
    record = json.loads((tmp_path / "r.json").read_text())
    assert record["fidelity"] >= 0.999999


def test_evolve_malformed_config(tmp_path, capsys):
    cfg = tmp_path / "broken.cfg"
    cfg.write_text("g1 = 100 MHz\nnonsense here\n")
    assert main(["evolve", "--config", str(cfg)]) == 2
    err = capsys.readouterr().err
    assert "broken.cfg:2" in err


def test_evolve_numerical_failure_exit_code(tmp_path, capsys):
    cfg = tmp_path / "coarse.cfg"
    cfg.write_text("max_phase_step = 10.0\nhard_step_cap = 1000 ns\n")
    assert main(["evolve", "--config", str(cfg), "--out",
                 str(tmp_path / "r.json")]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_sweep_files(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("T_grid = 25,30 us\nkappa_inv_grid = 2.0,2.5 us\n")
    prefix = tmp_path / "sw"
    assert main(["sweep", "--config", str(cfg), "--out", str(prefix)]) == 0
    csv_lines = (tmp_path / "sw.csv").read_text().splitlines()
    assert csv_lines[0] == "T_us,kappa_inv_us,fidelity,wall_s"
    assert len(csv_lines) == 5
    assert (tmp_path / "sw.dat").exists()
    record = json.loads((tmp_path / "sw.json").read_text())
    assert len(record["rows"]) == 4


def test_sweep_set_overrides(tmp_path, capsys):
    prefix = tmp_path / "sw"
    code = main(["sweep", "--set", "T_grid=30 us",
                 "--set", "kappa_inv_grid=2.5 us", "--out", str(prefix)])
    assert code == 0
    assert "1 grid points" in capsys.readouterr().out
    assert main(["sweep", "--set", "bogus=1", "--out", str(prefix)]) == 2


def test_schedule_output_stable(capsys):
    assert main(["schedule"]) == 0
    first = capsys.readouterr().out
    assert main(["schedule"]) == 0
    second = capsys.readouterr().out
    assert first == second
    assert first.strip().endswith("total 67.00 ns")
    assert "CAV q=1" in first and "PUL q=2" in first and "IDL t=" in first


def test_schedule_json(capsys):
    assert main(["schedule", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["total_ns"] == pytest.approx(67.0)
    assert payload["terms_ns"] == pytest.approx([8.75, 16.25, 20.0, 10.0, 12.0])
    assert len(payload["segments"]) == 24

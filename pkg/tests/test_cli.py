import json
import subprocess
import sys

import pytest

from kickanneal.cli import main


def write_config(tmp_path, **over):
    data = {
        "name": "cli",
        "model": {"model": "nn_tfim", "n_system": 3, "n_ancilla": 1, "theta_xx0": 1.0, "theta_mixer0": 5.0,
                  "tau": 0.25},
        "kick": {"theta": 0.01, "dt_k": 0.01, "n_k": 5},
        "evolution": {"dt": 0.005, "t_end": 0.5, "record_stride": 4},
        "sweep": {"thetas": [0.0, 0.01]},
        "landscape": {"thetas": [0.0, 0.05], "axis_pairs": [["Z", "X"]]},
        "theory": {"mixer_energy": "closed_form"},
    }
    data.update(over)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data))
    return path


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_run_writes_outputs(tmp_path, capsys):
    cfg = write_config(tmp_path)
    code, out, _ = run_cli(capsys, "run", str(cfg), "--out", str(tmp_path / "o"))
    assert code == 0
    payload = json.loads(out)
    assert payload["e_target"] == pytest.approx(-2.0, abs=1e-10)
    assert (tmp_path / "o" / "cli.csv").exists() and (tmp_path / "o" / "cli.json").exists()


def test_sweep_and_landscape(tmp_path, capsys):
    cfg = write_config(tmp_path)
    code, out, _ = run_cli(capsys, "sweep", str(cfg), "--out", str(tmp_path), "--workers", "1")
    assert code == 0 and len(json.loads(out)["rows"]) == 2
    assert (tmp_path / "cli_sweep.csv").exists()
    code, out, _ = run_cli(capsys, "landscape", str(cfg), "--out", str(tmp_path))
    assert code == 0 and json.loads(out)["initial_energy"] == pytest.approx(-15.0)
    assert (tmp_path / "cli_landscape.csv").exists()


def test_theory_oracle_validate(tmp_path, capsys):
    cfg = write_config(tmp_path)
    code, out, _ = run_cli(capsys, "theory", str(cfg))
    assert code == 0 and "c_xx" in json.loads(out)
    code, out, _ = run_cli(capsys, "oracle", str(cfg))
    assert code == 0 and json.loads(out)["e_target"] == pytest.approx(-2.0, abs=1e-10)
    code, out, _ = run_cli(capsys, "validate", str(cfg))
    assert code == 0 and json.loads(out) == {"name": "cli", "valid": True}


def test_configuration_error_exit_code(tmp_path, capsys):
    cfg = write_config(tmp_path, epsilon=5.0)
    code, out, err = run_cli(capsys, "validate", str(cfg))
    assert code == 2 and out == ""
    assert "epsilon" in err and "ConfigurationError" in err


def test_missing_config_exit_code(tmp_path, capsys):
    code, _, err = run_cli(capsys, "run", str(tmp_path / "nope.json"))
    assert code == 2 and "not found" in err


def test_sweep_without_grid_is_configuration_error(tmp_path, capsys):
    cfg = write_config(tmp_path, sweep=None)
    assert run_cli(capsys, "sweep", str(cfg))[0] == 2


def test_output_directory_unwritable_exit_code(tmp_path, capsys):
    cfg = write_config(tmp_path)
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = run_cli(capsys, "run", str(cfg), "--out", str(blocker / "sub"))
    assert code == 7 and "OSError" in err


def test_theory_domain_error_is_reported_not_fatal(tmp_path, capsys):
    # a too-strong kick puts speedup_ratio outside its domain; the report says why
    cfg = write_config(tmp_path, kick={"theta": 0.5, "dt_k": 0.01, "n_k": 5})
    code, out, _ = run_cli(capsys, "theory", str(cfg))
    payload = json.loads(out)
    assert code == 0 and payload["speedup_ratio"] is None and "speedup_ratio_error" in payload


def test_unknown_subcommand_exits_nonzero():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate", "x.json"])
    assert info.value.code != 0


def test_module_entry_point(tmp_path):
    cfg = write_config(tmp_path)
    proc = subprocess.run([sys.executable, "-m", "kickanneal", "validate", str(cfg)], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["valid"] is True

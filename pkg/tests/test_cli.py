"""Command-line surface: output formats and exit codes."""

import io
import json
import math

import pandas as pd
import pytest

from forced_heteroclinic.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, EXIT_VERIFICATION, main


def _run(config_file, capsys, *args):
    code = main(["--config", str(config_file), *args])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _json_tail(out):
    """The JSON document printed last; the command may print paths before it."""

    return json.loads(out[out.index("{"):])


def test_omega0_prints_threshold(config_file, capsys):
    code, out, _ = _run(config_file, capsys, "omega0")
    assert code == EXIT_OK
    data = _json_tail(out)
    assert data["omega0"] == pytest.approx(52.75, abs=0.5)
    assert data["omega_ceil"] == 53.0
    assert data["contraction_bound"] < 1.0


def test_model_return_map_table(config_file, capsys):
    code, out, _ = _run(config_file, capsys, "model-return-map", "--iterates", "5")
    assert code == EXIT_OK
    lines = out.strip().splitlines()
    assert lines[0] == "n,phi,r"
    assert len(lines) == 7


def test_model_return_map_to_file(config_file, capsys, tmp_path):
    target = tmp_path / "out" / "orbit.csv"
    code, out, _ = _run(config_file, capsys, "model-return-map", "--iterates", "3", "--output", str(target))
    assert code == EXIT_OK
    assert out.strip() == str(target)
    assert len(pd.read_csv(target)) == 4


def test_equilibria_needs_unforced_field(config_file, capsys):
    code, out, _ = _run(config_file, capsys, "equilibria", "--mu", "0")
    assert code == EXIT_OK
    frame = pd.read_csv(io.StringIO(out))
    assert {"O", "v", "w"} <= set(frame["label"])

    code, _, err = _run(config_file, capsys, "equilibria")
    assert code == EXIT_VALIDATION
    assert "Invalid input" in err


def test_strobe_table_carries_elapsed_time(config_file, capsys):
    code, out, _ = _run(
        config_file, capsys, "strobe", "--iterates", "3", "--transient", "1", "--x1", "0.4", "--x2", "0.3", "--x3", "0.5"
    )
    assert code == EXIT_OK
    frame = pd.read_csv(io.StringIO(out))
    assert list(frame.columns) == ["n", "x1", "x2", "x3", "t"]
    assert frame["n"].tolist() == [1, 2, 3, 4]
    assert frame["t"].tolist() == pytest.approx([math.pi * n for n in (1, 2, 3, 4)])


def test_invalid_override_is_a_validation_error(config_file, capsys):
    code, _, _ = _run(config_file, capsys, "omega0", "--beta", "0.5")
    assert code == EXIT_VALIDATION


def test_missing_config_file(tmp_path, capsys):
    code = main(["--config", str(tmp_path / "absent.yaml"), "omega0"])
    assert code == EXIT_VALIDATION


def test_horseshoe_fails_below_threshold(config_file, capsys, tmp_path):
    out_dir = tmp_path / "reports"
    code, out, err = _run(
        config_file, capsys, "horseshoe-verify", "--omega", "5", "--skip-itineraries", "--output-dir", str(out_dir)
    )
    assert code == EXIT_VERIFICATION
    assert "P1" in err
    assert _json_tail(out)["summary"]["passed"] is False
    assert list(out_dir.glob("horseshoe_*.json"))


def test_horseshoe_passes_at_default_frequency(config_file, capsys, tmp_path):
    out_dir = tmp_path / "reports"
    code, out, _ = _run(config_file, capsys, "horseshoe-verify", "--output-dir", str(out_dir), "--timestamp", "t0")
    assert code == EXIT_OK
    data = _json_tail(out)
    assert data["summary"]["passed"] is True
    assert data["summary"]["itineraries_realised"] == 16
    assert all(path.startswith(str(out_dir)) for path in data["files"])


def test_sweep_command(config_file, capsys, tmp_path):
    target = tmp_path / "sweeps" / "omega.csv"
    code, out, _ = _run(config_file, capsys, "sweep", "--axis", "omega", "0.05", "0.2", "3", "--output", str(target))
    assert code == EXIT_OK
    data = _json_tail(out)
    assert data["rows"] == 3
    assert pd.read_csv(target)["omega"].tolist() == pytest.approx([0.05, 0.125, 0.2])


def test_sweep_workers_from_environment(config_file, capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("FORCED_HETEROCLINIC_WORKERS", "0")
    code, _, _ = _run(config_file, capsys, "sweep", "--output", str(tmp_path / "s.csv"))
    assert code == EXIT_VALIDATION


def test_route_report_command(config_file, capsys, tmp_path):
    out_dir = tmp_path / "route"
    code, out, _ = _run(
        config_file, capsys, "route-report", "--omega", "0.05", "--omega", "3.2", "--output-dir", str(out_dir)
    )
    assert code == EXIT_OK
    data = _json_tail(out)
    assert data["onset"] is not None
    assert data["folds"][0] == 0
    assert (out_dir / "route_model_summary.csv").exists()


def test_exit_codes_are_distinct():
    assert len({EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_VERIFICATION}) == 4

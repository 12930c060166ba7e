"""Parameter sweeps: grids, per-point tasks, determinism and resume."""

import json
import math

import pandas as pd
import pytest

from forced_heteroclinic.pipeline.manifest import RunManifest
from forced_heteroclinic.pipeline.sweep import SweepRunner, SweepSpec, run_point, run_sweep
from forced_heteroclinic.section.classify import ClassifierSettings
from forced_heteroclinic.system.params import SystemParams

BASE = SystemParams(nu=0.05, mu=0.5)
LIGHT = ClassifierSettings(transient=50, iterations=200, circle_modes=8)


def _model_spec(**changes):
    values = dict(axes={"omega": (0.05, 3.0, 3)}, task="lyapunov", level="model", base=BASE, classifier=LIGHT)
    values.update(changes)
    return SweepSpec(**values)


@pytest.mark.parametrize(
    "changes",
    [
        {"axes": {}},
        {"axes": {"alpha": (0.1, 0.2, 3)}},
        {"axes": {"omega": (0.0, 1.0, 3)}},
        {"axes": {"nu": (-0.1, 0.1, 3)}},
        {"axes": {"omega": (1.0, 2.0, 1)}},
        {"axes": {"omega": (2.0, 1.0, 3)}},
        {"task": "classify"},
        {"task": "horseshoe", "level": "ode"},
        {"level": "pde"},
        {"seeds_per_point": 0},
    ],
)
def test_spec_validation(changes):
    with pytest.raises(ValueError):
        _model_spec(**changes)


def test_grid_order_is_row_major_over_nu_mu_omega():
    spec = _model_spec(axes={"omega": (1.0, 2.0, 2), "nu": (0.01, 0.03, 3)})
    grid = spec.grid()
    assert [index for index, _ in grid] == list(range(6))
    assert grid[0][1] == {"nu": 0.01, "omega": 1.0}
    assert grid[1][1] == {"nu": 0.01, "omega": 2.0}
    assert grid[5][1] == {"nu": 0.03, "omega": 2.0}


def test_model_lyapunov_sweep(tmp_path):
    result = run_sweep(_model_spec(), tmp_path / "sweep.csv")
    frame = pd.read_csv(result.csv_path)
    assert list(frame.columns) == _model_spec().columns
    assert list(frame["grid_index"]) == [0, 1, 2]
    assert set(frame["status"]) == {"ok"}
    assert frame["lambda2"].max() < 0.0, "the radial direction contracts at every omega"
    assert result.csv_path.with_suffix(".svg").exists()
    manifest = RunManifest.read(result.manifest_path)
    assert manifest.verify() == []
    assert manifest.config["task"] == "lyapunov"
    assert not (tmp_path / "sweep.partial.csv").exists()


def test_sweep_output_is_reproducible(tmp_path):
    first = run_sweep(_model_spec(seeds_per_point=2), tmp_path / "a" / "sweep.csv")
    second = run_sweep(_model_spec(seeds_per_point=2), tmp_path / "b" / "sweep.csv", workers=2)
    assert first.csv_path.read_bytes() == second.csv_path.read_bytes()
    assert len(first.frame) == 6


def test_resume_skips_completed_points(tmp_path):
    spec = _model_spec()
    fresh = run_sweep(spec, tmp_path / "fresh" / "sweep.csv")

    output = tmp_path / "resumed" / "sweep.csv"
    output.parent.mkdir()
    runner = SweepRunner(spec)
    partial, marker = runner._partial_paths(output)
    index, values = spec.grid()[0]
    runner._append(partial, run_point(spec, index, values))
    with marker.open("w", encoding="utf-8") as handle:
        json.dump({"config_hash": RunManifest.start(spec.to_mapping()).config_hash}, handle)

    resumed = runner.run(output)
    assert resumed.csv_path.read_bytes() == fresh.csv_path.read_bytes()


def test_resume_refuses_foreign_partial_results(tmp_path):
    output = tmp_path / "sweep.csv"
    runner = SweepRunner(_model_spec())
    partial, marker = runner._partial_paths(output)
    partial.write_text("grid_index\n0\n", encoding="utf-8")
    marker.write_text(json.dumps({"config_hash": "0" * 64}), encoding="utf-8")
    with pytest.raises(ValueError):
        runner.run(output)


def test_failed_points_become_status_rows():
    spec = _model_spec(axes={"nu": (0.0, 0.05, 2)}, task="horseshoe", horseshoe_grid=(32, 16))
    rows = run_point(spec, 0, {"nu": 0.0})
    assert rows[0]["status"].startswith("failed: NoWindow")
    assert math.isnan(rows[0]["lambda_h"])


def test_horseshoe_sweep_over_omega(tmp_path):
    spec = _model_spec(axes={"omega": (10.0, 60.0, 2)}, task="horseshoe", horseshoe_grid=(64, 32))
    result = run_sweep(spec, tmp_path / "horseshoe.csv")
    frame = pd.read_csv(result.csv_path)
    assert frame["passed"].tolist() == [False, True]
    assert frame["omega0"].iloc[0] == pytest.approx(frame["omega0"].iloc[1])
    assert 10.0 < frame["omega0"].iloc[0] < 60.0

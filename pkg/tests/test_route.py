"""Route to chaos: folding of the reference curve's image under the model map."""

import math

import numpy as np
import pandas as pd
import pytest

from forced_heteroclinic.model.return_map import ReturnMapModel
from forced_heteroclinic.pipeline.route import (
    ROUTE_COLUMNS,
    RouteSettings,
    bracket_onset,
    closed_lifted_increments,
    closed_wrapped_increments,
    count_folds,
    route_report,
)

LIGHT = RouteSettings(transient=50, iterations=200, curve_points=128, circle_modes=8)


def test_count_folds():
    assert count_folds(np.full(10, 0.1)) == 0
    assert count_folds(np.array([0.1, 0.2, -0.1, -0.3, 0.2])) == 2
    assert count_folds(np.array([0.1, -0.1, 0.1, -0.1])) == 4
    assert count_folds(np.array([0.0, 0.0])) == 0


def test_closed_increments():
    lifted = np.linspace(0.0, 2 * math.pi, 8, endpoint=False)
    np.testing.assert_allclose(closed_lifted_increments(lifted), 2 * math.pi / 8)
    wrapped = closed_wrapped_increments(np.mod(lifted + 5.0, 2 * math.pi))
    np.testing.assert_allclose(wrapped, 2 * math.pi / 8)


def test_bracket_onset():
    lo, hi = bracket_onset(lambda w: 2 if w >= 0.73 else 0, 0.5, 1.0, rel_tol=0.01)
    assert lo < 0.73 <= hi
    assert hi - lo <= 0.01 * hi


@pytest.fixture(scope="module")
def model_route(tmp_path_factory):
    output = tmp_path_factory.mktemp("route")
    return route_report(0.05, 0.5, [3.2, 0.05, 10.0, 0.2, 0.8], output, settings=LIGHT, model=ReturnMapModel()), output


def test_folds_appear_with_faster_forcing(model_route):
    report, _ = model_route
    assert [point.omega for point in report.points] == [0.05, 0.2, 0.8, 3.2, 10.0]
    assert report.points[0].folds == 0
    assert report.points[0].circle_found
    assert report.points[0].circle.residual < 1e-3
    locked = report.points[3]
    assert locked.folds >= 2
    assert locked.folds % 2 == 0
    assert not locked.circle_found
    assert locked.locked_period is not None
    assert locked.lambda1 < 0.0


def test_fast_forcing_is_chaotic(model_route):
    report, _ = model_route
    chaotic = report.points[-1]
    assert chaotic.omega == 10.0
    assert chaotic.folds >= 2
    assert chaotic.locked_period is None
    assert chaotic.lambda1 > max(3 * chaotic.lambda1_error, 1e-3)


def test_onset_is_bracketed_to_one_percent(model_route):
    report, _ = model_route
    assert report.onset is not None
    lo, hi = report.onset
    assert 0.05 <= lo < hi <= 3.2
    assert hi - lo <= 0.01 * hi


def test_route_outputs(model_route):
    report, output = model_route
    summary = pd.read_csv(output / "route_model_summary.csv")
    assert list(summary.columns) == ROUTE_COLUMNS
    assert summary["omega"].tolist() == [0.05, 0.2, 0.8, 3.2, 10.0]
    assert (output / "route_model_003.svg").exists()
    assert (output / "route_model_folds.svg").exists()
    onset = pd.read_csv(output / "route_model_onset.csv")
    assert onset["onset_lo"].iloc[0] == pytest.approx(report.onset[0])
    assert all(path.exists() for path in report.files)


@pytest.mark.parametrize(
    "nu,mu,omegas,level",
    [
        (0.0, 0.5, [0.1, 1.0], "model"),
        (0.05, 0.0, [0.1, 1.0], "model"),
        (0.05, 0.5, [0.1], "model"),
        (0.05, 0.5, [-0.1, 1.0], "model"),
        (0.05, 0.5, [0.1, 1.0], "pde"),
    ],
)
def test_route_validation(tmp_path, nu, mu, omegas, level):
    with pytest.raises(ValueError):
        route_report(nu, mu, omegas, tmp_path, level=level, settings=LIGHT)

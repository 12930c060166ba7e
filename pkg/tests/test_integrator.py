"""Integration of the forced field and section crossings."""

import math

import numpy as np
import pytest

from forced_heteroclinic.integration.integrator import (
    TRAJECTORY_COLUMNS,
    IntegratorConfig,
    cross_section_events,
    integrate,
    phase_error,
    section_times,
    tolerance_gap,
)
from forced_heteroclinic.system.params import State4


def test_unit_sphere_is_invariant_without_forcing(unforced, fast_integrator):
    s0 = State4(0.6, 0.0, 0.8, 0.0)
    traj = integrate(unforced, s0, fast_integrator, 20.0, t_eval=np.linspace(0.0, 20.0, 201))
    radii = np.linalg.norm(traj.spatial, axis=1)
    assert np.max(np.abs(radii - 1.0)) < 1e-7


def test_sphere_attracts(unforced, fast_integrator):
    """Orbits from inside the ball approach r = 1."""
    traj = integrate(unforced, State4(0.2, 0.1, 0.1, 0.0), fast_integrator, 30.0)
    assert abs(np.linalg.norm(traj.spatial[-1]) - 1.0) < 1e-6


def test_plane_stays_invariant_under_forcing(forced, fast_integrator):
    traj = integrate(forced, State4(0.3, 0.0, 0.5, 1.0), fast_integrator, 10.0)
    assert np.all(traj.spatial[:, 1] == 0.0)


def test_section_crossings_land_on_the_section(forced, fast_integrator):
    p = forced.with_(omega=2.0)
    traj = integrate(p, State4(0.3, 0.2, 0.5, 0.4), fast_integrator, 10.0)
    events = cross_section_events(traj, 0.0)
    assert len(events) == len(section_times(0.4, 2.0, 0.0, 10.0))
    times = [t for t, _ in events]
    np.testing.assert_allclose(np.diff(times), math.pi / 2.0, rtol=1e-12)
    for t, state in events:
        assert phase_error(traj.theta_at(t), 0.0) < 1e-9


def test_trajectory_frame_and_csv(tmp_path, forced, fast_integrator):
    traj = integrate(forced, State4(0.3, 0.2, 0.5), fast_integrator, 1.0, t_eval=np.linspace(0.0, 1.0, 11))
    frame = traj.to_frame()
    assert list(frame.columns) == TRAJECTORY_COLUMNS
    path = traj.to_csv(tmp_path / "traj" / "orbit.csv")
    assert path.read_text(encoding="utf-8").splitlines()[0] == ",".join(TRAJECTORY_COLUMNS)


def test_integrate_rejects_bad_inputs(forced):
    with pytest.raises(ValueError):
        integrate(forced, State4(0.1, 0.1, 0.1), IntegratorConfig(), 0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        integrate(forced, State4(0.1, 0.1, 0.1), IntegratorConfig(max_time=1.0), 5.0)


@pytest.mark.parametrize("rel_tol", [1e-6, 1e-8])
def test_halving_tolerances_barely_moves_the_endpoint(forced, rel_tol):
    cfg = IntegratorConfig(rel_tol=rel_tol, abs_tol=rel_tol / 100.0)
    halved = cfg.halved()
    assert halved.rel_tol == rel_tol / 2.0 and halved.abs_tol == cfg.abs_tol / 2.0
    gap = tolerance_gap(forced, State4(0.3, 0.2, 0.5, 0.0), cfg, 20.0)
    assert 0.0 <= gap < 10.0 * cfg.rel_tol

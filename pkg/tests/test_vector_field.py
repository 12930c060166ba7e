"""Tests for the forced vector field and its symmetries."""

import numpy as np
import pytest

from forced_heteroclinic.system.params import State4, SystemParams
from forced_heteroclinic.system.vector_field import (
    check_kappa_equivariance,
    check_plane_invariance,
    eval_jacobian,
    eval_rhs,
    nullcline_grid,
    planar_residual,
    random_states,
    sphere_radial_rate,
    spatial_rhs,
)


@pytest.mark.parametrize("nu", [0.0, 0.1, 0.5])
@pytest.mark.parametrize("mu", [0.0, 0.1, 0.5])
def test_kappa_equivariance(rng, nu, mu):
    """F(κs) = κF(s) on random points for every (ν, μ)."""
    p = SystemParams(nu=nu, mu=mu, omega=1.3)
    report = check_kappa_equivariance(p, random_states(rng, 1000))
    assert report.passed
    assert report.max_residual < 1e-12


@pytest.mark.parametrize("nu,mu", [(0.0, 0.0), (0.1, 0.5), (0.5, 0.1)])
def test_plane_invariance_is_exact(rng, nu, mu):
    p = SystemParams(nu=nu, mu=mu)
    report = check_plane_invariance(p, random_states(rng, 1000))
    assert report.passed
    assert report.max_residual == 0.0


def test_sphere_identity_without_forcing(rng, unforced):
    """d(r²)/dt = 2r²(1 − r²) when ν = μ = 0."""
    for s in random_states(rng, 1000):
        expected = 2.0 * s.r2 * (1.0 - s.r2)
        assert abs(sphere_radial_rate(unforced, s) - expected) < 1e-12


def test_phase_velocity_is_twice_omega(forced):
    s = State4(0.3, 0.2, -0.4, 1.0)
    assert eval_rhs(forced.with_(omega=2.5), s)[3] == pytest.approx(5.0)


def test_jacobian_matches_finite_differences(rng):
    p = SystemParams(nu=0.1, mu=0.5, omega=1.0)
    h = 1e-6
    for s in random_states(rng, 20):
        jac = eval_jacobian(p, s)
        x = s.as_array()
        numeric = np.zeros((4, 4))
        for j in range(4):
            step = np.zeros(4)
            step[j] = h
            plus = State4.from_array(x + step)
            minus = State4.from_array(x - step)
            # θ is wrapped by State4; use the unwrapped phase for the difference
            f_plus = np.append(spatial_rhs(p, plus.spatial, x[3] + step[3]), 2 * p.omega)
            f_minus = np.append(spatial_rhs(p, minus.spatial, x[3] - step[3]), 2 * p.omega)
            numeric[:, j] = (f_plus - f_minus) / (2 * h)
        np.testing.assert_allclose(jac, numeric, atol=1e-7)


def test_planar_residual_is_the_plane_restriction(rng):
    p = SystemParams(nu=0.05, mu=0.0)
    for x1, x3 in rng.uniform(-1.2, 1.2, size=(50, 2)):
        f1, f2 = planar_residual(p, x1, x3)
        full = spatial_rhs(p, np.array([x1, 0.0, x3]), 0.0)
        assert f1 == pytest.approx(full[0], abs=1e-14)
        assert f2 == pytest.approx(full[2], abs=1e-14)


def test_nullcline_grid_samples_the_planar_field():
    p = SystemParams(nu=0.05, mu=0.0)
    x1, x3, f1, f2 = nullcline_grid(p, extent=1.0, n=11)
    assert x1.shape == f1.shape == (11, 11)
    i, j = 3, 8
    assert (f1[i, j], f2[i, j]) == pytest.approx(planar_residual(p, x1[i, j], x3[i, j]))
    assert x3[0, 0] == -1.0 and x1[0, -1] == 1.0

"""Attractor classification on the stroboscopic section."""

import math

import numpy as np
import pytest

from forced_heteroclinic.integration.integrator import IntegratorConfig, integrate
from forced_heteroclinic.section.circles import rotation_number
from forced_heteroclinic.section.classify import (
    CLASSES,
    SUMMARY_COLUMNS,
    ClassifierSettings,
    OrbitSummary,
    basin_seeds,
    classify_attractor,
    classify_many,
    escaped_summary,
)
from forced_heteroclinic.section.lyapunov import CHAOS_FLOOR
from forced_heteroclinic.section.periodic import find_limit_cycle
from forced_heteroclinic.system.equilibria import saddle_distance
from forced_heteroclinic.system.params import State4, SystemParams

QUICK = ClassifierSettings(transient=60, iterations=120, circle_modes=8)


def test_unforced_network_is_reported_without_iterating(unforced):
    summary = classify_attractor(unforced, State4(0.5, 0.5, 0.5))
    assert summary.classification == "heteroclinic"
    assert math.isnan(summary.lyapunov[0])
    assert list(summary.to_row()) == SUMMARY_COLUMNS


def test_basin_seeds_come_in_kappa_pairs(forced, rng):
    seeds = basin_seeds(forced, 9, rng, theta=0.4)
    assert len(seeds) == 9
    for first, second in zip(seeds[0::2], seeds[1::2]):
        assert second == first.kappa()
    for s in seeds:
        assert s.r2 == pytest.approx(1.0)
        assert abs(s.x2) >= 0.1
        assert s.theta == pytest.approx(0.4)
    with pytest.raises(ValueError):
        basin_seeds(forced, 0, rng)


def test_summary_validation(forced):
    with pytest.raises(ValueError):
        OrbitSummary(0.1, 0.1, 1.0, 0, (0.0, -1.0, -2.0), (0.0, 0.0, 0.0), None, "strange")
    with pytest.raises(ValueError):
        OrbitSummary(0.1, 0.1, 1.0, 0, (-0.1, -1.0, -2.0), (0.0, 0.0, 0.0), None, "chaotic")
    periodic = OrbitSummary(0.1, 0.1, 1.0, 0, (-0.1, -1.0, -2.0), (0.0, 0.0, 0.0), 0.5, "periodic", period=2)
    assert periodic.label == "periodic(2)"
    assert escaped_summary(forced, 3, RuntimeError("boom")).classification == "escaped"
    assert set(CLASSES) >= {"fixed", "periodic", "quasiperiodic_torus", "chaotic", "escaped"}


def test_settings_validation():
    with pytest.raises(ValueError):
        ClassifierSettings(transient=-1)
    with pytest.raises(ValueError):
        ClassifierSettings(iterations=10, circle_modes=32)


@pytest.mark.slow
def test_symmetric_seeds_share_their_verdict(forced, fast_integrator, rng):
    """κ-related seeds reach κ-related attractors with identical exponents."""
    p = forced.with_(omega=2.0)
    seeds = basin_seeds(p, 2, rng)
    first, second = classify_many(p, seeds, fast_integrator, QUICK)
    assert first.label == second.label
    assert first.classification != "escaped"
    np.testing.assert_allclose(first.lyapunov, second.lyapunov, rtol=1e-9, atol=1e-12)
    x1, x2, x3 = first.final_point
    np.testing.assert_allclose(second.final_point, (x1, -x2, x3), atol=1e-12)
    assert first.transient_discarded == QUICK.transient


@pytest.mark.slow
def test_unforced_cycles_give_two_symmetric_tori():
    """At ν=0.1, μ=0, ω=1 the two hemispheres hold κ-mirrored attracting invariant circles."""
    p = SystemParams(nu=0.1, mu=0.0, omega=1.0)
    settings = ClassifierSettings(transient=300, iterations=400)
    seeds = basin_seeds(p, 2, np.random.default_rng(0))
    first, second = classify_many(p, seeds, None, settings)
    for summary in (first, second):
        assert summary.classification == "quasiperiodic_torus"
        assert summary.circle_residual < 1e-4
        assert summary.lyapunov[0] <= max(3 * summary.lyapunov_errors[0], CHAOS_FLOOR)
    x1, x2, x3 = first.final_point
    assert abs(x2) > 0.1
    np.testing.assert_allclose(second.final_point, (x1, -x2, x3), atol=1e-9)
    rho = rotation_number(p, seeds[0], settings.iterations, transient=settings.transient)
    assert 0.0 <= rho < 1.0
    assert rho == pytest.approx(first.rotation_number, abs=1e-6)


@pytest.mark.slow
def test_tori_approach_the_saddles_as_nu_shrinks():
    distances = []
    for nu in (0.1, 0.05, 0.02, 0.01):
        p = SystemParams(nu=nu, mu=0.0, omega=1.0)
        cycle = find_limit_cycle(p, np.array([0.5, 0.5, 0.5]))
        assert cycle.stability == "attracting"
        times = np.linspace(0.0, cycle.period, 4001)
        traj = integrate(p, State4(*cycle.point, 0.0), IntegratorConfig(), cycle.period, t_eval=times)
        distances.append(saddle_distance(p, traj.spatial))
    assert all(later < earlier for earlier, later in zip(distances, distances[1:]))
    assert distances[-1] > 0.0

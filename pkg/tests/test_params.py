"""Tests for parameters, forcing profiles and states."""

import math

import numpy as np
import pytest

from forced_heteroclinic.system.params import TWO_PI, ForcingProfile, State4, SystemParams, wrap_angle


def test_wrap_angle_range():
    """Angles are reduced to [0, 2π)."""
    for theta in (-1e-18, -TWO_PI, 3 * TWO_PI + 0.5, 0.0, -0.25):
        wrapped = wrap_angle(theta)
        assert 0.0 <= wrapped < TWO_PI
    assert wrap_angle(3 * TWO_PI + 0.5) == pytest.approx(0.5)
    assert wrap_angle(-0.25) == pytest.approx(TWO_PI - 0.25)


@pytest.mark.parametrize(
    "changes",
    [
        {"alpha": -1.0},
        {"beta": 0.1},
        {"beta": -1.5},
        {"mu": -0.1},
        {"omega": 0.0},
    ],
)
def test_system_params_rejects_invalid(changes):
    """β < 0 < α, |β| < α, μ ≥ 0 and ω > 0 are enforced at construction."""
    with pytest.raises(ValueError):
        SystemParams(**changes)


def test_system_params_mapping_round_trip():
    """A Fourier forcing survives to_mapping/from_mapping unchanged."""
    p = SystemParams(nu=0.05, mu=0.5, omega=3.0, forcing=ForcingProfile.fourier(0.0, (0.5, 0.25), (0.25,)))
    assert SystemParams.from_mapping(p.to_mapping()) == p
    assert p.strobe_period == pytest.approx(math.pi / 3.0)


def test_forcing_profile_derivative_matches_difference():
    profile = ForcingProfile.fourier(0.1, (0.5, -0.2), (0.3,))
    theta, h = 0.7, 1e-6
    numeric = (profile.value(theta + h) - profile.value(theta - h)) / (2 * h)
    assert profile.derivative(theta) == pytest.approx(numeric, rel=1e-8)


def test_cosine_profile_is_fixed():
    assert ForcingProfile.cosine().value(0.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        ForcingProfile("cosine", 0.5)


def test_state_kappa_and_arrays():
    s = State4(0.1, -0.2, 0.3, 7.0)
    assert s.kappa().x2 == pytest.approx(0.2)
    assert s.kappa().kappa() == s
    np.testing.assert_allclose(State4.from_array(s.as_array()).as_array(), s.as_array())
    assert s.r2 == pytest.approx(0.14)

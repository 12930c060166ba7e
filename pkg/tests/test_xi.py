"""The ξ profile and its decreasing window."""

import math

import numpy as np
import pytest

from forced_heteroclinic.exceptions import NoWindow
from forced_heteroclinic.model.xi import XiProfile, is_decreasing, xi_eval


def test_cosine_profile_extremes():
    xi = XiProfile(0.05, 0.5)
    assert xi.max_value() == pytest.approx(0.05 * (1 + 1 / 3), rel=1e-9)
    assert xi.min_value() == pytest.approx(0.05 * (1 - 1 / 3), rel=1e-6)
    assert xi.min_value() > 0.0


def test_decreasing_window_for_cosine():
    phi_1, phi_2 = XiProfile(0.05, 0.5).decreasing_window()
    assert phi_1 == pytest.approx(0.0, abs=1e-9)
    assert phi_2 == pytest.approx(math.pi, abs=1e-9)
    monotone, witness = is_decreasing(XiProfile(0.05, 0.5), (0.1, math.pi - 0.1))
    assert monotone and math.isnan(witness)


def test_window_detects_increase():
    monotone, witness = is_decreasing(XiProfile(0.05, 0.5), (math.pi + 0.1, 2 * math.pi - 0.1))
    assert not monotone
    assert math.pi < witness < 2 * math.pi


@pytest.mark.parametrize("nu,mu", [(0.0, 0.5), (0.05, 0.0)])
def test_no_window_when_constant(nu, mu):
    with pytest.raises(NoWindow):
        XiProfile(nu, mu).decreasing_window()


def test_derivative_matches_difference():
    xi = XiProfile(0.1, 0.7, (0.6,), (0.3,))
    phi = np.linspace(0.0, 2 * math.pi, 17)
    h = 1e-6
    numeric = (xi.value(phi + h) - xi.value(phi - h)) / (2 * h)
    np.testing.assert_allclose(xi.derivative(phi), numeric, atol=1e-9)
    value, slope = xi.scalar(1.3)
    assert (value, slope) == pytest.approx(tuple(float(v) for v in xi_eval(xi, 1.3)))


def test_shape_bound_is_enforced():
    with pytest.raises(ValueError):
        XiProfile(0.05, 0.5, (1.0, 0.5))

"""Expansion, contraction and the segment-stretching threshold."""

import math

import numpy as np
import pytest

from forced_heteroclinic.exceptions import NotMonotone
from forced_heteroclinic.model.bounds import (
    contraction_bound,
    contraction_sup,
    expansion_inf,
    lifted_spread,
    omega0,
    stretch_measure,
    window_values,
)
from forced_heteroclinic.model.return_map import ReturnMapModel, jacobian_grid
from forced_heteroclinic.model.xi import XiProfile


def test_omega0_closed_form():
    """ξ_L = 0.05, ξ_R = 0.01 and K = 4/0.81 give ω₀ ≈ 32.76."""
    model = ReturnMapModel(xi=XiProfile(0.03, 2.0))
    xi_l, xi_r = window_values(model, (0.0, math.pi))
    assert xi_l == pytest.approx(0.05)
    assert xi_r == pytest.approx(0.01)
    assert omega0(model, (0.0, math.pi)) == pytest.approx(32.76, rel=1e-3)


def test_omega0_grows_as_the_window_flattens(flagship):
    wide = omega0(flagship, (0.2, math.pi - 0.2))
    narrow = omega0(flagship, (1.5, 1.6))
    assert narrow > 10 * wide


def test_omega0_rejects_increasing_window(flagship):
    with pytest.raises(NotMonotone):
        omega0(flagship, (math.pi + 0.2, 2 * math.pi - 0.2))
    with pytest.raises(ValueError):
        omega0(flagship, (1.0, 0.5))


def test_stretching_at_threshold(flagship, flagship_domain, flagship_omega0):
    """At ω₀ every horizontal segment of D is stretched across D at least once."""
    window = (flagship_domain.phi_l, flagship_domain.phi_r)
    model = flagship.with_omega(flagship_omega0)
    for r_star in np.linspace(1.0 + flagship.eps_v / 100, 1.0 + flagship.eps_v, 100):
        delta = stretch_measure(model, float(r_star), window)
        assert delta >= 2 * math.pi + flagship_domain.width - 1e-9, f"r*={r_star}: {delta}"
        assert lifted_spread(model, float(r_star), window) == pytest.approx(delta, abs=1e-10)


def test_stretch_measure_is_linear_in_omega(flagship, flagship_domain):
    window = (flagship_domain.phi_l, flagship_domain.phi_r)
    r_star = 1.0 + flagship.eps_v
    low = stretch_measure(flagship, r_star, window, omega=1.0) - flagship_domain.width
    high = stretch_measure(flagship, r_star, window, omega=2.0) - flagship_domain.width
    assert high == pytest.approx(2.0 * low)
    with pytest.raises(ValueError):
        stretch_measure(flagship, 1.5, window)


def test_contraction_bounds(horseshoe_model, flagship_domain):
    """The analytic sup of ∂R₂/∂r matches the grid maximum."""
    xi_l = float(horseshoe_model.xi.value(flagship_domain.phi_l))
    phi = np.linspace(flagship_domain.phi_l, flagship_domain.phi_r, 200)[:, None]
    r = np.linspace(flagship_domain.r_lo, flagship_domain.r_hi, 50)[None, :]
    sampled = float(np.max(jacobian_grid(horseshoe_model, phi, r)["r2_r"]))
    exact = contraction_sup(horseshoe_model, xi_l)
    assert sampled == pytest.approx(exact, rel=0.05)
    assert sampled <= exact * (1 + 1e-12)
    assert exact < contraction_bound(horseshoe_model, xi_l) < 1.0
    assert expansion_inf(horseshoe_model, (flagship_domain.phi_l, flagship_domain.phi_r)) > 1.0

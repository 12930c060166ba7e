"""The closed-form return map on Out(P_v)."""

import math

import numpy as np
import pytest

from forced_heteroclinic.exceptions import BlockOverflow, OnStableManifold
from forced_heteroclinic.model.return_map import (
    AnalyticReturnMap,
    AnnulusPoint,
    ReturnMapModel,
    compose_factor_maps,
    d_return_map,
    jacobian_grid,
    local_map,
    preimage_phase,
    return_map,
    return_map_grid,
    transition_vw,
    transition_wv,
)
from forced_heteroclinic.model.xi import XiProfile


def _domain_points(domain, n=7):
    phis = np.linspace(domain.phi_l, domain.phi_r, n)
    rs = np.linspace(1.0 + 0.05 * domain.height, domain.r_hi, n)
    return [AnnulusPoint(float(phi), float(r)) for phi in phis for r in rs]


def test_model_constants(flagship):
    assert flagship.K == pytest.approx(2.0 * (0.9 + 1.1) / 0.81)
    assert flagship.delta == pytest.approx((1.1 / 0.9) ** 2)
    assert flagship.k_eps == pytest.approx(-2.0 * flagship.K * math.log(0.1))
    assert not flagship.globally_defined


def test_composition_matches_closed_form(flagship, flagship_domain):
    """Φ_v ∘ Ψ_wv ∘ Φ_w ∘ Ψ_vw agrees with the closed form."""
    model = flagship.with_omega(7.5)
    for pt in _domain_points(flagship_domain):
        composed = compose_factor_maps(model, pt)
        closed = return_map(model, pt)
        assert composed.phi == pytest.approx(closed.phi, abs=1e-9)
        assert composed.r == pytest.approx(closed.r, abs=1e-13)


def test_jacobian_matches_finite_differences(flagship, flagship_domain):
    model = flagship.with_omega(3.0)
    h = 1e-7
    for pt in _domain_points(flagship_domain, 4):
        jac = d_return_map(model, pt)
        numeric = np.zeros((2, 2))
        for j, (dphi, dr) in enumerate(((h, 0.0), (0.0, h))):
            plus = return_map(model, AnnulusPoint(pt.phi + dphi, pt.r + dr)).as_array()
            minus = return_map(model, AnnulusPoint(pt.phi - dphi, pt.r - dr)).as_array()
            numeric[:, j] = (plus - minus) / (2 * h)
        np.testing.assert_allclose(jac, numeric, rtol=1e-5, atol=1e-8)


def test_grid_versions_agree_with_pointwise(flagship, flagship_domain):
    model = flagship.with_omega(2.0)
    phi = np.linspace(flagship_domain.phi_l, flagship_domain.phi_r, 5)[:, None]
    r = np.linspace(1.001, flagship_domain.r_hi, 3)[None, :]
    r1, r2 = return_map_grid(model, phi, r)
    partials = jacobian_grid(model, phi, r)
    for i in range(phi.shape[0]):
        for j in range(r.shape[1]):
            pt = AnnulusPoint(float(phi[i, 0]), float(r[0, j]))
            image = return_map(model, pt)
            assert r1[i, j] == pytest.approx(image.phi, rel=1e-13)
            assert r2[i, j] == pytest.approx(image.r, rel=1e-13)
            jac = d_return_map(model, pt)
            assert partials["r1_phi"][i, j] == pytest.approx(jac[0, 0], rel=1e-12)
            assert partials["r2_r"][i, j] == pytest.approx(jac[1, 1], rel=1e-12)


def test_lift_has_degree_one(flagship):
    """R(φ + 2π, r) = R(φ, r) + (2π, 0)."""
    model = flagship.with_omega(4.0)
    pt = AnnulusPoint(0.4, 1.02)
    shifted = return_map(model, AnnulusPoint(pt.phi + 2 * math.pi, pt.r))
    base = return_map(model, pt)
    assert shifted.phi - base.phi == pytest.approx(2 * math.pi, abs=1e-9)
    assert shifted.r == pytest.approx(base.r, abs=1e-14)
    wrapped = return_map(model, pt, lift=False)
    assert 0.0 <= wrapped.phi < 2 * math.pi


def test_stable_manifold_and_block_errors(flagship):
    with pytest.raises(OnStableManifold):
        return_map(flagship, AnnulusPoint(0.0, 0.5))
    with pytest.raises(OnStableManifold):
        return_map_grid(flagship, np.array([0.0]), np.array([0.8]))
    with pytest.raises(OnStableManifold):
        local_map("v", flagship, AnnulusPoint(0.0, 0.0))
    with pytest.raises(BlockOverflow):
        local_map("w", flagship, AnnulusPoint(0.0, 0.2))


def test_preimage_phase_inverts_first_component(flagship, flagship_domain, horseshoe_model):
    r = 1.02
    phi_target = 0.5 * (flagship_domain.phi_l + flagship_domain.phi_r)
    target = return_map(horseshoe_model, AnnulusPoint(phi_target, r)).phi
    solved = preimage_phase(horseshoe_model, target, r, (flagship_domain.phi_l, flagship_domain.phi_r))
    assert solved == pytest.approx(phi_target, abs=1e-12)
    assert preimage_phase(horseshoe_model, target + 1e6, r, (flagship_domain.phi_l, flagship_domain.phi_r)) is None


def test_analytic_section_map_orbit(flagship):
    section = AnalyticReturnMap(flagship.with_omega(1.5))
    orbit = section.orbit(np.array([1.0, 1.03]), 25)
    assert orbit.shape == (26, 2)
    assert np.all((orbit[1:, 0] >= 0.0) & (orbit[1:, 0] < 2 * math.pi))
    assert np.all(orbit[1:, 1] > 1.0)


def test_model_validation():
    with pytest.raises(ValueError):
        ReturnMapModel(eps_v=0.2, eps_w=0.1)
    with pytest.raises(ValueError):
        ReturnMapModel(c_v=0.5, e_v=0.9, c_w=0.5, e_w=0.9)
    assert ReturnMapModel(xi=XiProfile(0.01, 0.5)).globally_defined


def test_model_from_system(unforced):
    model = ReturnMapModel.from_system(unforced.with_(nu=0.05, mu=0.5))
    assert model.c_v == pytest.approx(1.1, abs=1e-10)
    assert model.e_w == pytest.approx(0.9, abs=1e-10)
    assert model.xi == XiProfile(0.05, 0.5)


def test_transition_maps_fit_the_blocks(flagship):
    model = flagship.with_omega(2.0)
    top = transition_wv(model, AnnulusPoint(0.4, 1.0 + model.eps_w))
    assert top.r == pytest.approx(model.eps_v)
    assert top.phi == pytest.approx(0.4 + 2.0 * model.K * math.log(model.eps_w))

    phi = 2.0
    r = 1.0 + model.eps_w - float(model.xi.value(phi))
    entry = transition_vw(model, AnnulusPoint(phi, r))
    assert entry.r == pytest.approx(model.eps_w)
    assert return_map(model, AnnulusPoint(phi, r)).r == pytest.approx(1.0 + model.eps_v)

    with pytest.raises(BlockOverflow):
        transition_vw(model, AnnulusPoint(phi, 1.0 + model.eps_w))
    with pytest.raises(BlockOverflow):
        transition_wv(model, AnnulusPoint(phi, 1.0 + 2 * model.eps_w))

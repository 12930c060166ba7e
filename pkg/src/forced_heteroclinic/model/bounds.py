from __future__ import annotations

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from ..exceptions import NotMonotone, OnStableManifold
from .return_map import AnnulusPoint, ReturnMapModel, return_map
from .xi import SCAN_POINTS, is_decreasing

logger = logging.getLogger("forced_heteroclinic.model.bounds")


def window_values(model: ReturnMapModel, window: Sequence[float]) -> Tuple[float, float]:
    """(ξ_L, ξ_R) after checking that ξ decreases on *window*."""

    phi_l, phi_r = float(window[0]), float(window[1])
    if not phi_l < phi_r:
        raise ValueError(f"Window must satisfy phi_L < phi_R, got [{phi_l}, {phi_r}]")
    ok, witness = is_decreasing(model.xi, (phi_l, phi_r), SCAN_POINTS)
    if not ok:
        raise NotMonotone(f"xi is not decreasing on [{phi_l:.6g}, {phi_r:.6g}]", witness=witness)
    return float(model.xi.value(phi_l)), float(model.xi.value(phi_r))


def omega0(model: ReturnMapModel, window: Sequence[float]) -> float:
    """Smallest ω for which R stretches every horizontal segment of D across D at least once."""

    xi_l, xi_r = window_values(model, window)
    gap = math.log1p((xi_l - xi_r) / (1.0 + xi_r))
    if gap <= 0.0:
        raise NotMonotone("xi_L equals xi_R on the window; no finite threshold", witness=float(window[0]))
    value = 2.0 * math.pi / (model.K * gap)
    logger.debug("omega0 on [%.6g, %.6g]: xi_L=%.6g xi_R=%.6g -> %.6g", window[0], window[1], xi_l, xi_r, value)
    return value


def stretch_measure(
    model: ReturnMapModel,
    r_star: float,
    window: Sequence[float],
    omega: Optional[float] = None,
) -> float:
    """Lifted angular spread Δ of R over the segment {r = r*} × window."""

    if not 1.0 < r_star <= 1.0 + model.eps_v * (1.0 + 1e-12):
        raise ValueError(f"r* must lie in (1, 1+eps_v], got {r_star}")
    omega = model.omega if omega is None else omega
    phi_l, phi_r = float(window[0]), float(window[1])
    rho_l = (r_star - 1.0) + float(model.xi.value(phi_l))
    rho_r = (r_star - 1.0) + float(model.xi.value(phi_r))
    if rho_l <= 0.0 or rho_r <= 0.0:
        raise OnStableManifold(f"segment r*={r_star} touches the stable manifold", point=(phi_l, phi_r))
    return (phi_r - phi_l) + omega * model.K * math.log(rho_l / rho_r)


def lifted_spread(model: ReturnMapModel, r_star: float, window: Sequence[float]) -> float:
    """R₁(φ_R, r*) − R₁(φ_L, r*) from the return map itself."""

    left = return_map(model, AnnulusPoint(float(window[0]), r_star))
    right = return_map(model, AnnulusPoint(float(window[1]), r_star))
    return right.phi - left.phi


def contraction_bound(model: ReturnMapModel, xi_l: float) -> float:
    """Upper bound δ(ε_v/ε_w)((ε_w+ξ_L)/ε_w)^{δ−1} for ∂R₂/∂r on D."""

    return model.delta * (model.eps_v / model.eps_w) * ((model.eps_w + xi_l) / model.eps_w) ** (model.delta - 1.0)


def contraction_sup(model: ReturnMapModel, xi_l: float) -> float:
    """sup of ∂R₂/∂r on D = window × [1, 1+ε_v], attained at (φ_L, 1+ε_v)."""

    return model.delta * (model.eps_v / model.eps_w) * ((model.eps_v + xi_l) / model.eps_w) ** (model.delta - 1.0)


def expansion_inf(model: ReturnMapModel, window: Sequence[float], n: int = 2048) -> float:
    """Sampled inf of ∂R₁/∂φ = 1 − ωK ξ'(φ)/ρ over D."""

    phi = np.linspace(float(window[0]), float(window[1]), n)
    dxi = model.xi.derivative(phi)
    xi = model.xi.value(phi)
    wk = model.omega * model.K
    # −ξ' ≥ 0 on the window, so the minimum over r sits at the top edge
    return float(np.min(1.0 - wk * dxi / (model.eps_v + xi)))

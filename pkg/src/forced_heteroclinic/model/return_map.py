from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..exceptions import BlockOverflow, OnStableManifold
from ..maps.base import SectionMap
from ..system.equilibria import NodeData, node_data
from ..system.params import SystemParams, wrap_angle
from .xi import XiProfile

logger = logging.getLogger("forced_heteroclinic.model.return_map")

BLOCK_TOL = 1e-12


@dataclass(frozen=True)
class AnnulusPoint:
    """(φ, r) in the covering coordinates of an In/Out wall; φ is kept lifted."""

    phi: float
    r: float

    def wrapped(self) -> "AnnulusPoint":
        return AnnulusPoint(wrap_angle(self.phi), self.r)

    def as_array(self) -> np.ndarray:
        return np.array([self.phi, self.r])


@dataclass(frozen=True)
class ReturnMapModel:
    """Saddle rates, block sizes, forcing frequency and ξ profile of the geometric model."""

    c_v: float = 1.1
    e_v: float = 0.9
    c_w: float = 1.1
    e_w: float = 0.9
    eps_v: float = 0.04
    eps_w: float = 0.1
    omega: float = 1.0
    xi: XiProfile = field(default_factory=lambda: XiProfile(0.05, 0.5))

    def __post_init__(self) -> None:
        for name in ("c_v", "e_v", "c_w", "e_w", "omega"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not (0.0 < self.eps_v < self.eps_w < 1.0):
            raise ValueError(f"Require 0 < eps_v < eps_w < 1, got eps_v={self.eps_v}, eps_w={self.eps_w}")
        if self.delta <= 1.0:
            raise ValueError(f"Attraction constant delta must exceed 1, got {self.delta:.6g}")

    @property
    def delta_v(self) -> float:
        return self.c_v / self.e_v

    @property
    def delta_w(self) -> float:
        return self.c_w / self.e_w

    @property
    def delta(self) -> float:
        return self.delta_v * self.delta_w

    @property
    def K(self) -> float:
        return 2.0 * (self.e_v + self.c_w) / (self.e_v * self.e_w)

    @property
    def k_eps(self) -> float:
        return -2.0 * self.K * math.log(self.eps_w)

    @property
    def globally_defined(self) -> bool:
        """ε_v + max ξ ≤ ε_w: every point of Out(P_v) reaches In(P_w) inside the block."""

        return self.eps_v + self.xi.max_value() <= self.eps_w

    def rates(self, a: str) -> Tuple[float, float, float]:
        """(c_a, e_a, ε_a) for a saddle label 'v' or 'w'."""

        if a == "v":
            return self.c_v, self.e_v, self.eps_v
        if a == "w":
            return self.c_w, self.e_w, self.eps_w
        raise ValueError(f"Unknown saddle label: {a}. Allowed: v, w")

    def with_omega(self, omega: float) -> "ReturnMapModel":
        return replace(self, omega=float(omega))

    def with_xi(self, xi: XiProfile) -> "ReturnMapModel":
        return replace(self, xi=xi)

    def to_mapping(self) -> Dict[str, Any]:
        return {
            "c_v": self.c_v,
            "e_v": self.e_v,
            "c_w": self.c_w,
            "e_w": self.e_w,
            "eps_v": self.eps_v,
            "eps_w": self.eps_w,
            "omega": self.omega,
            "xi_nu": self.xi.nu,
            "xi_mu": self.xi.mu,
            "xi_cos": list(self.xi.cos_coefficients),
            "xi_sin": list(self.xi.sin_coefficients),
        }

    @classmethod
    def from_node_data(
        cls,
        data: NodeData,
        xi: XiProfile,
        omega: float,
        eps_v: float = 0.04,
        eps_w: float = 0.1,
    ) -> "ReturnMapModel":
        return cls(data.c_v, data.e_v, data.c_w, data.e_w, eps_v, eps_w, omega, xi)

    @classmethod
    def from_system(
        cls,
        p: SystemParams,
        eps_v: float = 0.04,
        eps_w: float = 0.1,
        xi: Optional[XiProfile] = None,
    ) -> "ReturnMapModel":
        """Rates from the saddles of the autonomous field at (α, β); ν and μ feed ξ."""

        data = node_data(p.with_(nu=0.0, mu=0.0))
        profile = xi if xi is not None else XiProfile(p.nu, p.mu)
        model = cls.from_node_data(data, profile, p.omega, eps_v, eps_w)
        if not model.globally_defined:
            logger.warning(
                "eps_v + max xi = %.6g exceeds eps_w = %.6g; return map is only defined on part of Out(P_v)",
                eps_v + profile.max_value(),
                eps_w,
            )
        return model


def local_map(a: str, model: ReturnMapModel, pt: AnnulusPoint, lift: bool = True) -> AnnulusPoint:
    """Φ_a: In(P_a) → Out(P_a) of the linearized suspension flow."""

    c_a, e_a, eps_a = model.rates(a)
    if pt.r <= 0.0:
        raise OnStableManifold(f"r={pt.r} lies on the stable manifold of P_{a}", point=pt)
    if pt.r > eps_a * (1.0 + BLOCK_TOL):
        raise BlockOverflow(f"r={pt.r} exceeds the In(P_{a}) wall height {eps_a}", point=pt)
    ratio = pt.r / eps_a
    phi = pt.phi - (2.0 * model.omega / e_a) * math.log(ratio)
    r = 1.0 + eps_a * ratio ** (c_a / e_a)
    out = AnnulusPoint(phi, r)
    return out if lift else out.wrapped()


def transition_vw(model: ReturnMapModel, pt: AnnulusPoint) -> AnnulusPoint:
    """Ψ_{v→w}(φ, r) = (φ, (r−1) + ξ(φ))."""

    r = (pt.r - 1.0) + float(model.xi.value(pt.phi))
    if r > model.eps_w * (1.0 + BLOCK_TOL):
        raise BlockOverflow(f"(r-1)+xi = {r:.6g} overflows In(P_w) (eps_w={model.eps_w})", point=pt)
    return AnnulusPoint(pt.phi, r)


def transition_wv(model: ReturnMapModel, pt: AnnulusPoint) -> AnnulusPoint:
    """Ψ_{w→v}(φ, r) = (φ + ωK ln ε_w, (ε_v/ε_w)(r−1)).

    The radial scaling fits Out(P_w) onto In(P_v); the constant phase lag is
    the flight time of the w→v connection. An identity radius here would
    overflow In(P_v); with the scaling, `compose_factor_maps` reproduces the
    closed form of `return_map`, including the ε_v/ε_w^δ coefficient of R₂.
    """

    if pt.r - 1.0 > model.eps_w * (1.0 + BLOCK_TOL):
        raise BlockOverflow(f"r={pt.r} outside Out(P_w) (eps_w={model.eps_w})", point=pt)
    phi = pt.phi + model.omega * model.K * math.log(model.eps_w)
    return AnnulusPoint(phi, (model.eps_v / model.eps_w) * (pt.r - 1.0))


def compose_factor_maps(model: ReturnMapModel, pt: AnnulusPoint, lift: bool = True) -> AnnulusPoint:
    """Φ_v ∘ Ψ_{w→v} ∘ Φ_w ∘ Ψ_{v→w}, evaluated map by map."""

    q = transition_vw(model, pt)
    q = local_map("w", model, q)
    q = transition_wv(model, q)
    q = local_map("v", model, q)
    return q if lift else q.wrapped()


def _rho(model: ReturnMapModel, pt: AnnulusPoint) -> float:
    rho = (pt.r - 1.0) + float(model.xi.value(pt.phi))
    if rho <= 0.0:
        raise OnStableManifold(f"(r-1)+xi = {rho:.6g} <= 0 at phi={pt.phi:.6g}", point=pt)
    return rho


def return_map(model: ReturnMapModel, pt: AnnulusPoint, lift: bool = True) -> AnnulusPoint:
    """R(φ, r) = (φ − ωK ln ρ − ωk_ε, 1 + ε_v (ρ/ε_w)^δ) with ρ = (r−1) + ξ(φ)."""

    rho = _rho(model, pt)
    phi = pt.phi - model.omega * model.K * math.log(rho) - model.omega * model.k_eps
    r = 1.0 + model.eps_v * (rho / model.eps_w) ** model.delta
    out = AnnulusPoint(phi, r)
    return out if lift else out.wrapped()


def d_return_map(model: ReturnMapModel, pt: AnnulusPoint) -> np.ndarray:
    """Jacobian [[∂R₁/∂φ, ∂R₁/∂r], [∂R₂/∂φ, ∂R₂/∂r]]."""

    rho = _rho(model, pt)
    dxi = float(model.xi.derivative(pt.phi))
    wk = model.omega * model.K
    dr2 = model.delta * (model.eps_v / model.eps_w) * (rho / model.eps_w) ** (model.delta - 1.0)
    return np.array(
        [
            [1.0 - wk * dxi / rho, -wk / rho],
            [dr2 * dxi, dr2],
        ]
    )


def return_map_grid(model: ReturnMapModel, phi: np.ndarray, r: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised lifted return map; *phi* and *r* broadcast against each other."""

    rho = (np.asarray(r, dtype=float) - 1.0) + model.xi.value(np.asarray(phi, dtype=float))
    if np.any(rho <= 0.0):
        raise OnStableManifold("(r-1)+xi <= 0 somewhere on the grid")
    r1 = phi - model.omega * model.K * np.log(rho) - model.omega * model.k_eps
    r2 = 1.0 + model.eps_v * (rho / model.eps_w) ** model.delta
    return r1, r2


def jacobian_grid(model: ReturnMapModel, phi: np.ndarray, r: np.ndarray) -> Dict[str, np.ndarray]:
    """The four partial derivatives of R on a grid, keyed 'r1_phi', 'r1_r', 'r2_phi', 'r2_r'."""

    phi, r = np.broadcast_arrays(np.asarray(phi, dtype=float), np.asarray(r, dtype=float))
    rho = (r - 1.0) + model.xi.value(phi)
    if np.any(rho <= 0.0):
        raise OnStableManifold("(r-1)+xi <= 0 somewhere on the grid")
    dxi = model.xi.derivative(phi)
    wk = model.omega * model.K
    dr2 = model.delta * (model.eps_v / model.eps_w) * (rho / model.eps_w) ** (model.delta - 1.0)
    return {
        "r1_phi": 1.0 - wk * dxi / rho,
        "r1_r": -wk / rho,
        "r2_phi": dr2 * dxi,
        "r2_r": dr2,
    }


def preimage_phase(
    model: ReturnMapModel,
    target: float,
    r: float,
    bracket: Tuple[float, float],
    tol: float = 1e-15,
    max_iter: int = 60,
) -> Optional[float]:
    """φ in *bracket* with R₁(φ, r) = *target*, or None when the target is not bracketed.

    Safeguarded Newton: R₁ is increasing in φ wherever ξ decreases.
    """

    wk = model.omega * model.K
    shift = model.omega * model.k_eps

    def residual(phi: float) -> Tuple[float, float]:
        xi, dxi = model.xi.scalar(phi)
        rho = (r - 1.0) + xi
        return phi - wk * math.log(rho) - shift - target, 1.0 - wk * dxi / rho

    lo, hi = bracket
    g_lo, _ = residual(lo)
    g_hi, _ = residual(hi)
    if g_lo > 0.0 or g_hi < 0.0:
        return None
    phi = 0.5 * (lo + hi)
    for _ in range(max_iter):
        g, slope = residual(phi)
        if g == 0.0:
            return phi
        if g < 0.0:
            lo = phi
        else:
            hi = phi
        candidate = phi - g / slope if slope > 0.0 else 0.5 * (lo + hi)
        if not lo < candidate < hi:
            candidate = 0.5 * (lo + hi)
        if abs(candidate - phi) <= tol * (1.0 + abs(phi)):
            return candidate
        phi = candidate
    return phi


class AnalyticReturnMap(SectionMap):
    """The closed-form return map as a planar map on Out(P_v)."""

    name = "model"
    dimension = 2

    def __init__(self, model: ReturnMapModel, lift: bool = False) -> None:
        self.model = model
        self.lift = lift

    def step(self, x: np.ndarray) -> np.ndarray:
        image = return_map(self.model, AnnulusPoint(float(x[0]), float(x[1])), lift=self.lift)
        return image.as_array()

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        return d_return_map(self.model, AnnulusPoint(float(x[0]), float(x[1])))

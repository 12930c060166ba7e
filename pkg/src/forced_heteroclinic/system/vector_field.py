from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .params import State4, SystemParams

logger = logging.getLogger("forced_heteroclinic.system.vector_field")

KAPPA = np.diag([1.0, -1.0, 1.0])


def forcing_term(p: SystemParams, theta: float) -> float:
    """The scalar μ[f(θ) − 1] + ν multiplying (1 − x1)."""

    if p.mu == 0.0:
        return p.nu
    return p.mu * (p.forcing.value(theta) - 1.0) + p.nu


def spatial_rhs(p: SystemParams, x: np.ndarray, theta: float) -> np.ndarray:
    """Spatial components (ẋ1, ẋ2, ẋ3) at phase *theta* (θ need not be reduced)."""

    x1, x2, x3 = x[0], x[1], x[2]
    s = 1.0 - (x1 * x1 + x2 * x2 + x3 * x3)
    a, b = p.alpha, p.beta
    return np.array(
        [
            x1 * s - a * x1 * x3 + b * x1 * x3 * x3 + (1.0 - x1) * forcing_term(p, theta),
            x2 * s + a * x2 * x3 + b * x2 * x3 * x3,
            x3 * s - a * (x2 * x2 - x1 * x1) - b * x3 * (x1 * x1 + x2 * x2),
        ]
    )


def spatial_jacobian(p: SystemParams, x: np.ndarray, theta: float) -> np.ndarray:
    """∂(ẋ1, ẋ2, ẋ3)/∂(x1, x2, x3)."""

    x1, x2, x3 = x[0], x[1], x[2]
    s = 1.0 - (x1 * x1 + x2 * x2 + x3 * x3)
    a, b = p.alpha, p.beta
    g = forcing_term(p, theta)
    return np.array(
        [
            [
                s - 2.0 * x1 * x1 - a * x3 + b * x3 * x3 - g,
                -2.0 * x1 * x2,
                -2.0 * x1 * x3 - a * x1 + 2.0 * b * x1 * x3,
            ],
            [
                -2.0 * x1 * x2,
                s - 2.0 * x2 * x2 + a * x3 + b * x3 * x3,
                -2.0 * x2 * x3 + a * x2 + 2.0 * b * x2 * x3,
            ],
            [
                -2.0 * x1 * x3 + 2.0 * a * x1 - 2.0 * b * x1 * x3,
                -2.0 * x2 * x3 - 2.0 * a * x2 - 2.0 * b * x2 * x3,
                s - 2.0 * x3 * x3 - b * (x1 * x1 + x2 * x2),
            ],
        ]
    )


def eval_rhs(p: SystemParams, s: State4) -> np.ndarray:
    """(ẋ1, ẋ2, ẋ3, θ̇) of the forced field; θ̇ = 2ω."""

    velocity = np.empty(4)
    velocity[:3] = spatial_rhs(p, s.spatial, s.theta)
    velocity[3] = 2.0 * p.omega
    return velocity


def eval_jacobian(p: SystemParams, s: State4) -> np.ndarray:
    """4×4 Jacobian in the order (x1, x2, x3, θ). The θ row is zero."""

    jac = np.zeros((4, 4))
    jac[:3, :3] = spatial_jacobian(p, s.spatial, s.theta)
    if p.mu != 0.0:
        jac[0, 3] = (1.0 - s.x1) * p.mu * p.forcing.derivative(s.theta)
    return jac


def sphere_radial_rate(p: SystemParams, s: State4) -> float:
    """d(r²)/dt along the flow."""

    return float(2.0 * np.dot(s.spatial, spatial_rhs(p, s.spatial, s.theta)))


def planar_residual(p: SystemParams, x1: float, x3: float) -> Tuple[float, float]:
    """(F1, F2): the field restricted to the invariant plane x2 = 0 with μ = 0; broadcasts over arrays."""

    s = 1.0 - x1 * x1 - x3 * x3
    f1 = x1 * s - p.alpha * x1 * x3 + p.beta * x1 * x3 * x3 + (1.0 - x1) * p.nu
    f2 = x3 * s + p.alpha * x1 * x1 - p.beta * x3 * x1 * x1
    return f1, f2


def nullcline_grid(
    p: SystemParams, extent: float = 1.5, n: int = 201
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Sample F1 and F2 on a square grid of the (x1, x3) plane."""

    axis = np.linspace(-extent, extent, n)
    x1, x3 = np.meshgrid(axis, axis, indexing="xy")
    f1, f2 = planar_residual(p, x1, x3)
    return x1, x3, f1, f2


@dataclass(frozen=True)
class SymmetryReport:
    passed: bool
    max_residual: float
    worst_point: Optional[State4]
    tolerance: float


def check_kappa_equivariance(
    p: SystemParams,
    sample_points: Iterable[State4],
    tolerance: float = 1e-12,
) -> SymmetryReport:
    """Check ‖F(κs) − κF(s)‖ on *sample_points*."""

    worst = 0.0
    worst_point: Optional[State4] = None
    for s in sample_points:
        lhs = spatial_rhs(p, s.kappa().spatial, s.theta)
        rhs = KAPPA @ spatial_rhs(p, s.spatial, s.theta)
        residual = float(np.max(np.abs(lhs - rhs)))
        if worst_point is None or residual > worst:
            worst, worst_point = residual, s
    passed = worst < tolerance
    if not passed:
        logger.warning("kappa-equivariance violated: residual=%.3e at %s", worst, worst_point)
    return SymmetryReport(passed, worst, worst_point if not passed else None, tolerance)


def check_plane_invariance(p: SystemParams, sample_points: Iterable[State4]) -> SymmetryReport:
    """On x2 = 0 the x2-velocity must vanish identically."""

    worst = 0.0
    worst_point: Optional[State4] = None
    for s in sample_points:
        on_plane = State4(s.x1, 0.0, s.x3, s.theta)
        residual = abs(float(spatial_rhs(p, on_plane.spatial, on_plane.theta)[1]))
        if worst_point is None or residual > worst:
            worst, worst_point = residual, on_plane
    passed = worst == 0.0
    return SymmetryReport(passed, worst, worst_point if not passed else None, 0.0)


def random_states(
    rng: np.random.Generator, n: int, r_range: Sequence[float] = (0.5, 1.5)
) -> list[State4]:
    """Uniform directions with radius drawn from *r_range* and random phase."""

    directions = rng.normal(size=(n, 3))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = rng.uniform(r_range[0], r_range[1], size=n)
    thetas = rng.uniform(0.0, 2.0 * np.pi, size=n)
    points = directions * radii[:, None]
    return [State4(x[0], x[1], x[2], th) for x, th in zip(points, thetas)]

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..integration.integrator import IntegratorConfig, flow_with_tangent, solve_spatial
from ..maps.base import SectionMap
from ..system.params import State4, SystemParams, wrap_angle

logger = logging.getLogger("forced_heteroclinic.section.strobe")


@dataclass(frozen=True)
class SectionMapSample:
    input: State4
    output: State4
    flight_time: float


def strobe_map(p: SystemParams, s: State4, q: int = 1, cfg: Optional[IntegratorConfig] = None) -> State4:
    """q-th iterate of the time-π/ω map; the phase of *s* fixes the section."""

    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    cfg = cfg or IntegratorConfig()
    solution = solve_spatial(p, s.spatial, s.theta, q * p.strobe_period, cfg)
    return s.with_spatial(solution.y[:, -1])


def strobe_sample(p: SystemParams, s: State4, cfg: Optional[IntegratorConfig] = None) -> SectionMapSample:
    return SectionMapSample(s, strobe_map(p, s, 1, cfg), p.strobe_period)


class StroboscopicMap(SectionMap):
    """Return map of the forced field to the section θ = θ*, acting on (x1, x2, x3)."""

    name = "ode"
    dimension = 3

    def __init__(
        self,
        p: SystemParams,
        theta_star: float = 0.0,
        cfg: Optional[IntegratorConfig] = None,
        q: int = 1,
    ) -> None:
        if q < 1:
            raise ValueError(f"q must be >= 1, got {q}")
        self.p = p
        self.theta_star = wrap_angle(theta_star)
        self.cfg = cfg or IntegratorConfig()
        self.q = q

    @property
    def flight_time(self) -> float:
        return self.q * self.p.strobe_period

    def step(self, x: np.ndarray) -> np.ndarray:
        solution = solve_spatial(self.p, x, self.theta_star, self.flight_time, self.cfg)
        return np.asarray(solution.y[:, -1])

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        return self.step_with_jacobian(x)[1]

    def step_with_jacobian(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return flow_with_tangent(self.p, x, self.theta_star, self.flight_time, self.cfg)

    def state(self, x: np.ndarray) -> State4:
        return State4(x[0], x[1], x[2], self.theta_star)


def network_distance(x: np.ndarray) -> float:
    """Distance from x to the heteroclinic network: the unit circle of {x2 = 0} plus the x2-connections.

    Points of the network lie on the unit sphere with x2 = 0, or with x1 = 0
    (the connections from w to v through x2 ≠ 0).
    """

    x = np.asarray(x, dtype=float)
    radius = float(np.linalg.norm(x))
    sphere_gap = abs(radius - 1.0)
    plane_gap = min(abs(float(x[1])), abs(float(x[0])))
    return math.hypot(sphere_gap, plane_gap)

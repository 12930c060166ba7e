from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import OdeSolution, solve_ivp

from ..exceptions import Divergence, StepUnderflow
from ..system.params import TWO_PI, State4, SystemParams, wrap_angle
from ..system.vector_field import spatial_jacobian, spatial_rhs

logger = logging.getLogger("forced_heteroclinic.integration.integrator")

DIVERGENCE_RADIUS = 1e6
TRAJECTORY_COLUMNS = ["t", "x1", "x2", "x3", "theta"]


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 1.0
    max_time: float = 1e6

    def __post_init__(self) -> None:
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("Integrator tolerances must be positive.")
        if self.max_step <= 0.0:
            raise ValueError("max_step must be positive.")
        if self.max_time <= 0.0:
            raise ValueError("max_time must be positive.")

    def halved(self) -> "IntegratorConfig":
        return IntegratorConfig(self.rel_tol / 2.0, self.abs_tol / 2.0, self.max_step, self.max_time)


def _divergence_event(t: float, y: np.ndarray) -> float:
    return float(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) - DIVERGENCE_RADIUS**2


_divergence_event.terminal = True  # type: ignore[attr-defined]


def _run(
    fun: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    t1: float,
    y0: np.ndarray,
    cfg: IntegratorConfig,
    dense_output: bool = False,
    t_eval: Optional[Sequence[float]] = None,
):
    if abs(t1 - t0) > cfg.max_time:
        raise ValueError(f"Requested span {abs(t1 - t0)} exceeds max_time={cfg.max_time}")
    solution = solve_ivp(
        fun,
        (t0, t1),
        y0,
        method="RK45",
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
        max_step=cfg.max_step,
        dense_output=dense_output,
        t_eval=t_eval,
        events=_divergence_event,
    )
    if solution.status == 1:
        t_hit = float(solution.t_events[0][0]) if len(solution.t_events[0]) else float(solution.t[-1])
        raise Divergence(f"|x| exceeded {DIVERGENCE_RADIUS:g} at t={t_hit:.6g}", time=t_hit)
    if solution.status < 0:
        t_fail = float(solution.t[-1]) if len(solution.t) else t0
        raise StepUnderflow(f"Integration failed at t={t_fail:.6g}: {solution.message}", time=t_fail)
    return solution


def solve_spatial(
    p: SystemParams,
    x0: Sequence[float],
    theta0: float,
    duration: float,
    cfg: IntegratorConfig,
    dense_output: bool = False,
    t_eval: Optional[Sequence[float]] = None,
):
    """Integrate the spatial components for *duration* (negative runs backward).

    The phase is not integrated: θ(t) = θ0 + 2ωt exactly.
    """

    two_omega = 2.0 * p.omega

    def fun(t: float, y: np.ndarray) -> np.ndarray:
        return spatial_rhs(p, y, theta0 + two_omega * t)

    return _run(fun, 0.0, duration, np.asarray(x0, dtype=float), cfg, dense_output, t_eval)


def flow_with_tangent(
    p: SystemParams,
    x0: Sequence[float],
    theta0: float,
    duration: float,
    cfg: IntegratorConfig,
    tangent0: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Spatial state and 3×k tangent block after *duration*.

    The tangent block solves Ẏ = Dₓ F(x, θ(t)) Y; with the default identity it
    is the spatial monodromy of the time-*duration* map.
    """

    two_omega = 2.0 * p.omega
    y_tan = np.eye(3) if tangent0 is None else np.asarray(tangent0, dtype=float)
    k = y_tan.shape[1]

    def fun(t: float, y: np.ndarray) -> np.ndarray:
        theta = theta0 + two_omega * t
        x = y[:3]
        out = np.empty_like(y)
        out[:3] = spatial_rhs(p, x, theta)
        out[3:] = (spatial_jacobian(p, x, theta) @ y[3:].reshape(3, k)).ravel()
        return out

    y0 = np.concatenate([np.asarray(x0, dtype=float), y_tan.ravel()])
    solution = _run(fun, 0.0, duration, y0, cfg)
    y_end = solution.y[:, -1]
    return y_end[:3], y_end[3:].reshape(3, k)


@dataclass
class Trajectory:
    """Sampled solution with the integrator's dense output."""

    times: np.ndarray
    spatial: np.ndarray
    theta0: float
    omega: float
    interpolant: Optional[OdeSolution] = None

    def theta_at(self, t: float) -> float:
        return wrap_angle(self.theta0 + 2.0 * self.omega * t)

    def state_at(self, t: float) -> State4:
        if self.interpolant is None:
            raise ValueError("Trajectory was integrated without dense output.")
        x = self.interpolant(t)
        return State4(x[0], x[1], x[2], self.theta_at(t))

    @property
    def samples(self) -> List[Tuple[float, State4]]:
        return [
            (float(t), State4(x[0], x[1], x[2], self.theta_at(float(t))))
            for t, x in zip(self.times, self.spatial)
        ]

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def to_frame(self) -> pd.DataFrame:
        thetas = np.array([self.theta_at(float(t)) for t in self.times])
        return pd.DataFrame(
            {
                "t": self.times,
                "x1": self.spatial[:, 0],
                "x2": self.spatial[:, 1],
                "x3": self.spatial[:, 2],
                "theta": thetas,
            },
            columns=TRAJECTORY_COLUMNS,
        )

    def to_csv(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.17g", encoding="utf-8")
        logger.info("Trajectory with %s samples saved to %s", len(self.times), path)
        return path


def integrate(
    p: SystemParams,
    s0: State4,
    cfg: IntegratorConfig,
    t_end: float,
    t_eval: Optional[Sequence[float]] = None,
) -> Trajectory:
    """Integrate the forced field from *s0* over [0, t_end] with dense output."""

    if t_end <= 0.0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    solution = solve_spatial(p, s0.spatial, s0.theta, t_end, cfg, dense_output=True, t_eval=t_eval)
    logger.debug("Integrated to t=%s in %s steps (%s rhs evaluations)", t_end, len(solution.t), solution.nfev)
    return Trajectory(
        times=np.asarray(solution.t),
        spatial=np.asarray(solution.y).T.copy(),
        theta0=s0.theta,
        omega=p.omega,
        interpolant=solution.sol,
    )


def tolerance_gap(p: SystemParams, s0: State4, cfg: IntegratorConfig, t_end: float) -> float:
    """Endpoint change when both tolerances are halved; converged runs stay below 10 × rel_tol."""

    coarse = integrate(p, s0, cfg, t_end).spatial[-1]
    fine = integrate(p, s0, cfg.halved(), t_end).spatial[-1]
    gap = float(np.max(np.abs(fine - coarse)))
    if gap >= 10.0 * cfg.rel_tol:
        logger.warning("Halving tolerances moved the endpoint by %.3e (rel_tol=%g)", gap, cfg.rel_tol)
    return gap


def section_times(theta0: float, omega: float, theta_star: float, t_end: float) -> np.ndarray:
    """Times in [0, t_end] at which θ0 + 2ωt ≡ θ* (mod 2π)."""

    first = wrap_angle(theta_star - theta0) / (2.0 * omega)
    if first > t_end + 1e-12:
        return np.empty(0)
    period = math.pi / omega
    count = int(math.floor((t_end - first) / period + 1e-12)) + 1
    return first + period * np.arange(count)


def cross_section_events(traj: Trajectory, theta_star: float) -> List[Tuple[float, State4]]:
    """Crossings of the global section θ = θ*; states from the dense output."""

    theta_star = wrap_angle(theta_star)
    events: List[Tuple[float, State4]] = []
    for t in section_times(traj.theta0, traj.omega, theta_star, traj.t_end):
        t = min(float(t), traj.t_end)
        state = traj.state_at(t)
        events.append((t, State4(state.x1, state.x2, state.x3, theta_star)))
    return events


def phase_error(theta: float, theta_star: float) -> float:
    """Distance between two phases on the circle."""

    diff = wrap_angle(theta - theta_star)
    return min(diff, TWO_PI - diff)

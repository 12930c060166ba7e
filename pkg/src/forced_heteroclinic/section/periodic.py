from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from ..exceptions import Divergence, NonConvergence, StepUnderflow
from ..integration.integrator import IntegratorConfig, flow_with_tangent, solve_spatial
from ..system.equilibria import tangential_eigenvalues
from ..system.params import State4, SystemParams
from ..system.vector_field import spatial_rhs
from .strobe import StroboscopicMap

logger = logging.getLogger("forced_heteroclinic.section.periodic")

NEWTON_TOL = 1e-10
MAX_STEP = 0.2


def stability_of(multipliers) -> str:
    moduli = np.abs(np.asarray(multipliers, dtype=complex))
    if np.all(moduli < 1.0):
        return "attracting"
    if np.all(moduli > 1.0):
        return "repelling"
    return "saddle"


@dataclass(frozen=True)
class PeriodicOrbitRecord:
    point_on_section: State4
    period_multiple: int
    floquet_multipliers: Tuple[complex, complex]
    stability: str
    residual: float
    all_multipliers: Tuple[complex, ...] = ()


@dataclass(frozen=True)
class LimitCycleRecord:
    """Periodic orbit of the autonomous spatial field (μ = 0)."""

    point: np.ndarray
    period: float
    multipliers: Tuple[complex, complex]
    stability: str
    residual: float

    def strobe_rotation(self, omega: float) -> float:
        """Rotation of the strobe map restricted to the cycle, in turns per iterate."""

        return float(np.mod((np.pi / omega) / self.period, 1.0))


def find_periodic_orbit(
    p: SystemParams,
    seed: State4,
    q: int = 1,
    cfg: Optional[IntegratorConfig] = None,
    max_iter: int = 30,
    tol: float = NEWTON_TOL,
) -> PeriodicOrbitRecord:
    """Newton on x ↦ P^q(x) − x for the stroboscopic map P at the phase of *seed*."""

    section = StroboscopicMap(p, seed.theta, cfg, q)
    x = seed.spatial
    residual = np.inf
    for iteration in range(max_iter):
        try:
            image, monodromy = section.step_with_jacobian(x)
        except (Divergence, StepUnderflow) as exc:
            raise NonConvergence(f"Newton iterate left the integrable region: {exc}", seeds=[seed]) from exc
        f = image - x
        residual = float(np.linalg.norm(f))
        logger.debug("Newton q=%s iteration %s residual %.3e", q, iteration, residual)
        if residual < tol:
            break
        try:
            step = np.linalg.solve(monodromy - np.eye(3), -f)
        except np.linalg.LinAlgError as exc:
            raise NonConvergence("Singular Newton matrix (multiplier at 1)", seeds=[seed]) from exc
        length = float(np.linalg.norm(step))
        if length > MAX_STEP:
            step *= MAX_STEP / length
        x = x + step
    else:
        image, monodromy = section.step_with_jacobian(x)
        residual = float(np.linalg.norm(image - x))

    if residual >= tol:
        raise NonConvergence(f"Periodic orbit search stalled at residual {residual:.3e}", seeds=[seed])

    multipliers = tuple(complex(m) for m in np.linalg.eigvals(monodromy))
    pair = tangential_eigenvalues(monodromy, x)
    pair = tuple(sorted(pair, key=abs))
    record = PeriodicOrbitRecord(
        point_on_section=seed.with_spatial(x),
        period_multiple=q,
        floquet_multipliers=(pair[0], pair[1]),
        stability=stability_of(pair),
        residual=residual,
        all_multipliers=multipliers,
    )
    logger.info(
        "Periodic orbit q=%s at %s: multipliers %s (%s)",
        q,
        np.array2string(x, precision=6),
        [f"{abs(m):.6g}" for m in pair],
        record.stability,
    )
    return record


def _first_return_time(
    p: SystemParams, x_ref: np.ndarray, cfg: IntegratorConfig, max_period: float, min_period: float
) -> float:
    """First time the orbit through *x_ref* crosses the hyperplane through x_ref ⟂ F(x_ref) in the same direction."""

    normal = spatial_rhs(p, x_ref, 0.0)
    solution = solve_spatial(p, x_ref, 0.0, max_period, cfg, dense_output=True)
    times = np.linspace(min_period, float(solution.t[-1]), 20_000)
    values = normal @ (solution.sol(times) - x_ref[:, None])
    for i in range(len(times) - 1):
        if values[i] < 0.0 <= values[i + 1]:
            t_hit = brentq(lambda t: float(normal @ (solution.sol(t) - x_ref)), times[i], times[i + 1], xtol=1e-13)
            if np.linalg.norm(solution.sol(t_hit) - x_ref) < 0.05:
                return float(t_hit)
    raise NonConvergence(f"No return to the reference section within t={max_period}", seeds=[x_ref])


def find_limit_cycle(
    p: SystemParams,
    seed: np.ndarray,
    cfg: Optional[IntegratorConfig] = None,
    relax_time: float = 300.0,
    max_period: float = 500.0,
    min_period: float = 0.5,
    max_iter: int = 30,
    tol: float = NEWTON_TOL,
) -> LimitCycleRecord:
    """Attracting periodic orbit of the autonomous field (μ = 0).

    The seed is relaxed forward, the period is read off a first return, and
    Newton polishes (x, T) under the phase condition F(x_ref)·(x − x_ref) = 0.
    """

    if p.mu != 0.0:
        raise ValueError("find_limit_cycle needs the autonomous field (mu = 0); use find_periodic_orbit.")
    cfg = cfg or IntegratorConfig()
    try:
        x = np.asarray(solve_spatial(p, seed, 0.0, relax_time, cfg).y[:, -1])
        period = _first_return_time(p, x, cfg, max_period, min_period)
    except (Divergence, StepUnderflow) as exc:
        raise NonConvergence(f"Relaxation failed: {exc}", seeds=[seed]) from exc

    x_ref = x.copy()
    normal = spatial_rhs(p, x_ref, 0.0)
    residual = np.inf
    monodromy = np.eye(3)
    for iteration in range(max_iter):
        image, monodromy = flow_with_tangent(p, x, 0.0, period, cfg)
        f = np.append(image - x, normal @ (x - x_ref))
        residual = float(np.linalg.norm(f))
        logger.debug("Limit cycle Newton iteration %s: T=%.12g residual %.3e", iteration, period, residual)
        if residual < tol:
            break
        jac = np.zeros((4, 4))
        jac[:3, :3] = monodromy - np.eye(3)
        jac[:3, 3] = spatial_rhs(p, image, 0.0)
        jac[3, :3] = normal
        step = np.linalg.solve(jac, -f)
        x = x + step[:3]
        period = period + step[3]
    if residual >= tol:
        raise NonConvergence(f"Limit cycle Newton stalled at residual {residual:.3e}", seeds=[seed])

    values = np.linalg.eigvals(monodromy)
    trivial = int(np.argmin(np.abs(values - 1.0)))
    pair = tuple(sorted((complex(v) for i, v in enumerate(values) if i != trivial), key=abs))
    record = LimitCycleRecord(x, float(period), (pair[0], pair[1]), stability_of(pair), residual)
    logger.info("Limit cycle nu=%s: period %.10g, multipliers %s", p.nu, period, [f"{abs(m):.4g}" for m in pair])
    return record

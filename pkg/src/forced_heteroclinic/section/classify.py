from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..exceptions import FitFailed, Undefined
from ..integration.integrator import IntegratorConfig
from ..system.params import State4, SystemParams
from ..system.vector_field import spatial_rhs
from .circles import DEFAULT_MODES, detect_period, invariant_circle_fit, rotation_number_of_orbit
from .lyapunov import CHAOS_FLOOR, LyapunovResult, ESCAPE_ERRORS, qr_run, summarize_logs
from .strobe import StroboscopicMap

logger = logging.getLogger("forced_heteroclinic.section.classify")

SUMMARY_COLUMNS = ["nu", "mu", "omega", "seed", "lambda1", "lambda2", "lambda3", "rho", "class"]
CLASSES = ("fixed", "periodic", "quasiperiodic_torus", "chaotic", "escaped", "heteroclinic", "unresolved")


@dataclass(frozen=True)
class ClassifierSettings:
    transient: int = 1000
    iterations: int = 1000
    circle_modes: int = DEFAULT_MODES
    circle_tolerance: float = 1e-4
    chaos_floor: float = CHAOS_FLOOR
    period_tolerance: float = 1e-7
    max_period: int = 64

    def __post_init__(self) -> None:
        if self.transient < 0:
            raise ValueError("transient must be >= 0")
        if self.iterations < 2 * self.circle_modes + 1:
            raise ValueError("iterations must cover the circle fit")


@dataclass(frozen=True)
class OrbitSummary:
    nu: float
    mu: float
    omega: float
    seed: int
    lyapunov: Tuple[float, float, float]
    lyapunov_errors: Tuple[float, float, float]
    rotation_number: Optional[float]
    classification: str
    period: Optional[int] = None
    transient_discarded: int = 0
    circle_residual: float = math.nan
    final_point: Optional[Tuple[float, float, float]] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.classification not in CLASSES:
            raise ValueError(f"Unknown classification {self.classification}")
        if self.classification == "chaotic" and not self.lyapunov[0] > 0.0:
            raise ValueError("A chaotic verdict needs a positive top exponent")

    @property
    def label(self) -> str:
        if self.classification == "periodic":
            return f"periodic({self.period})"
        return self.classification

    def to_row(self) -> Dict[str, Any]:
        return {
            "nu": self.nu,
            "mu": self.mu,
            "omega": self.omega,
            "seed": self.seed,
            "lambda1": self.lyapunov[0],
            "lambda2": self.lyapunov[1],
            "lambda3": self.lyapunov[2],
            "rho": math.nan if self.rotation_number is None else self.rotation_number,
            "class": self.label,
        }


_NAN3 = (math.nan, math.nan, math.nan)


def _summary(p: SystemParams, seed: int, classification: str, **kwargs: Any) -> OrbitSummary:
    return OrbitSummary(
        nu=p.nu,
        mu=p.mu,
        omega=p.omega,
        seed=seed,
        lyapunov=kwargs.pop("lyapunov", _NAN3),
        lyapunov_errors=kwargs.pop("lyapunov_errors", _NAN3),
        rotation_number=kwargs.pop("rotation_number", None),
        classification=classification,
        **kwargs,
    )


def classify_attractor(
    p: SystemParams,
    s0: State4,
    cfg: Optional[IntegratorConfig] = None,
    settings: Optional[ClassifierSettings] = None,
    seed: int = 0,
) -> OrbitSummary:
    """One verdict for the attractor reached from *s0* by the stroboscopic map.

    Order of tests: escape, period detection, positive exponent, circle fit.
    ν = μ = 0 is reported as the heteroclinic special case without iterating.
    """

    settings = settings or ClassifierSettings()
    if p.nu == 0.0 and p.mu == 0.0:
        logger.info("nu = mu = 0: orbits accumulate on the heteroclinic network (non-hyperbolic case)")
        return _summary(p, seed, "heteroclinic")

    section = StroboscopicMap(p, s0.theta, cfg)
    x = s0.spatial
    try:
        for _ in range(settings.transient):
            x = section.step(x)
        logs, orbit = qr_run(section, x, settings.iterations)
    except ESCAPE_ERRORS as exc:
        logger.warning("Orbit from %s escaped: %s", s0, exc)
        return _summary(p, seed, "escaped", transient_discarded=settings.transient)

    result: LyapunovResult = summarize_logs(logs, section.flight_time)
    common: Dict[str, Any] = {
        "lyapunov": result.exponents,
        "lyapunov_errors": result.standard_errors,
        "transient_discarded": settings.transient,
        "final_point": tuple(float(v) for v in orbit[-1]),
    }

    period = detect_period(orbit, settings.max_period, settings.period_tolerance)
    if period is not None:
        rho = rotation_number_of_orbit(orbit, velocity=lambda y: spatial_rhs(p, y, s0.theta)) if period > 1 else 0.0
        verdict = "fixed" if period == 1 else "periodic"
        logger.info("nu=%s mu=%s omega=%s: %s (q=%s)", p.nu, p.mu, p.omega, verdict, period)
        return _summary(p, seed, verdict, period=period, rotation_number=rho, **common)

    if result.is_chaotic(settings.chaos_floor):
        logger.info("nu=%s mu=%s omega=%s: chaotic, lambda1=%.4g+-%.2g", p.nu, p.mu, p.omega, result.top, result.top_error)
        return _summary(p, seed, "chaotic", **common)

    try:
        circle = invariant_circle_fit(orbit, settings.circle_modes)
    except FitFailed as exc:
        logger.info("nu=%s mu=%s omega=%s: unresolved (%s)", p.nu, p.mu, p.omega, exc)
        return _summary(p, seed, "unresolved", **common)

    if circle.residual < settings.circle_tolerance and result.is_neutral(settings.chaos_floor):
        try:
            rho = rotation_number_of_orbit(orbit, velocity=lambda y: spatial_rhs(p, y, s0.theta))
        except Undefined:
            rho = None
        logger.info("nu=%s mu=%s omega=%s: invariant circle, rho=%s", p.nu, p.mu, p.omega, rho)
        return _summary(p, seed, "quasiperiodic_torus", rotation_number=rho, circle_residual=circle.residual, **common)

    return _summary(p, seed, "unresolved", circle_residual=circle.residual, **common)


def basin_seeds(p: SystemParams, n: int, rng: np.random.Generator, theta: float = 0.0) -> List[State4]:
    """Seeds on the unit sphere, alternating between x2 > 0 and its κ-image.

    Seeds keep away from the invariant plane (|x2| ≥ 0.1) and from the four
    repelling foci in {x3 = 0}.
    """

    if n < 1:
        raise ValueError("n must be positive")
    foci = np.array([[a, b, 0.0] for a in (-1.0, 1.0) for b in (-1.0, 1.0)]) / math.sqrt(2.0)
    seeds: List[State4] = []
    while len(seeds) < n:
        x = rng.normal(size=3)
        x /= np.linalg.norm(x)
        x[1] = abs(x[1])
        if x[1] < 0.1 or np.min(np.linalg.norm(foci - x, axis=1)) < 0.2:
            continue
        seed = State4(x[0], x[1], x[2], theta)
        seeds.append(seed)
        if len(seeds) < n:
            seeds.append(seed.kappa())
    return seeds


def classify_many(
    p: SystemParams,
    seeds: List[State4],
    cfg: Optional[IntegratorConfig] = None,
    settings: Optional[ClassifierSettings] = None,
) -> List[OrbitSummary]:
    return [classify_attractor(p, s, cfg, settings, seed=i) for i, s in enumerate(seeds)]


def escaped_summary(p: SystemParams, seed: int, reason: Exception) -> OrbitSummary:
    logger.warning("Orbit %s escaped: %s", seed, reason)
    return _summary(p, seed, "escaped")

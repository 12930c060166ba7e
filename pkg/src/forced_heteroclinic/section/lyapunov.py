from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..exceptions import BlockOverflow, Divergence, Escaped, OnStableManifold, StepUnderflow
from ..integration.integrator import IntegratorConfig
from ..maps.base import SectionMap
from ..system.params import State4, SystemParams
from .strobe import StroboscopicMap

logger = logging.getLogger("forced_heteroclinic.section.lyapunov")

MIN_ITERATIONS = 1000
BLOCK_COUNT = 20
CHAOS_FLOOR = 1e-3

ESCAPE_ERRORS = (Divergence, StepUnderflow, OnStableManifold, BlockOverflow, FloatingPointError)


@dataclass(frozen=True)
class LyapunovResult:
    """Exponents sorted descending with block-average standard errors."""

    exponents: Tuple[float, ...]
    standard_errors: Tuple[float, ...]
    iterations: int
    time_per_iterate: float = 1.0

    @property
    def top(self) -> float:
        return self.exponents[0]

    @property
    def top_error(self) -> float:
        return self.standard_errors[0]

    def is_chaotic(self, floor: float = CHAOS_FLOOR) -> bool:
        return self.top > max(3.0 * self.top_error, floor)

    def is_neutral(self, floor: float = CHAOS_FLOOR) -> bool:
        return abs(self.top) <= max(3.0 * self.top_error, floor)


def qr_run(section_map: SectionMap, x0: np.ndarray, n_iter: int) -> Tuple[np.ndarray, np.ndarray]:
    """Iterate with QR re-orthonormalisation of the tangent frame every step.

    Returns (log|diag R| per iterate, orbit of n_iter + 1 points).
    """

    dim = section_map.dimension
    x = np.asarray(x0, dtype=float)
    frame = np.eye(dim)
    logs = np.empty((n_iter, dim))
    orbit = np.empty((n_iter + 1, dim))
    orbit[0] = x
    for i in range(n_iter):
        x, jac = section_map.step_with_jacobian(x)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(jac))):
            raise FloatingPointError(f"non-finite iterate at step {i}")
        frame, upper = np.linalg.qr(jac @ frame)
        diag = np.diag(upper)
        if np.any(diag == 0.0):
            raise FloatingPointError(f"tangent frame collapsed at step {i}")
        frame = frame * np.sign(diag)
        logs[i] = np.log(np.abs(diag))
        orbit[i + 1] = x
    return logs, orbit


def _block_errors(logs: np.ndarray, blocks: int) -> np.ndarray:
    n = logs.shape[0]
    blocks = max(2, min(blocks, n // 2))
    size = n // blocks
    means = logs[: size * blocks].reshape(blocks, size, -1).mean(axis=1)
    return means.std(axis=0, ddof=1) / math.sqrt(blocks)


def summarize_logs(logs: np.ndarray, time_per_iterate: float = 1.0, blocks: int = BLOCK_COUNT) -> LyapunovResult:
    exponents = logs.mean(axis=0) / time_per_iterate
    errors = _block_errors(logs, blocks) / time_per_iterate
    order = np.argsort(exponents)[::-1]
    return LyapunovResult(
        tuple(float(v) for v in exponents[order]),
        tuple(float(v) for v in errors[order]),
        logs.shape[0],
        time_per_iterate,
    )


def map_lyapunov(
    section_map: SectionMap,
    x0: np.ndarray,
    n_iter: int,
    n_transient: int = 0,
    blocks: int = BLOCK_COUNT,
) -> LyapunovResult:
    """Per-iterate Lyapunov spectrum of any section map."""

    if n_iter < 2:
        raise ValueError("n_iter must be at least 2")
    try:
        x = np.asarray(x0, dtype=float)
        for _ in range(n_transient):
            x = section_map.step(x)
        logs, _ = qr_run(section_map, x, n_iter)
    except ESCAPE_ERRORS as exc:
        raise Escaped(f"Orbit of the {section_map.name} map escaped: {exc}") from exc
    result = summarize_logs(logs, 1.0, blocks)
    logger.debug("map_lyapunov(%s): %s +- %s", section_map.name, result.exponents, result.standard_errors)
    return result


def lyapunov_spectrum(
    p: SystemParams,
    s0: State4,
    n_iter: int = MIN_ITERATIONS,
    n_transient: int = MIN_ITERATIONS,
    cfg: Optional[IntegratorConfig] = None,
    blocks: int = BLOCK_COUNT,
) -> LyapunovResult:
    """Spatial Lyapunov exponents per unit time, from the tangent flow sampled once per forcing period."""

    if n_iter < MIN_ITERATIONS:
        raise ValueError(f"n_iter must be >= {MIN_ITERATIONS} strobe iterates, got {n_iter}")
    section = StroboscopicMap(p, s0.theta, cfg)
    result = map_lyapunov(section, s0.spatial, n_iter, n_transient, blocks)
    scaled = LyapunovResult(
        tuple(v / section.flight_time for v in result.exponents),
        tuple(v / section.flight_time for v in result.standard_errors),
        result.iterations,
        section.flight_time,
    )
    logger.info(
        "Lyapunov spectrum nu=%s mu=%s omega=%s: %s",
        p.nu,
        p.mu,
        p.omega,
        ", ".join(f"{v:.5g}+-{e:.2g}" for v, e in zip(scaled.exponents, scaled.standard_errors)),
    )
    return scaled

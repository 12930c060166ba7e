from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ..exceptions import FitFailed, Undefined
from ..integration.integrator import IntegratorConfig
from ..system.params import TWO_PI, State4, SystemParams
from ..system.vector_field import spatial_rhs
from .strobe import StroboscopicMap

logger = logging.getLogger("forced_heteroclinic.section.circles")

DEFAULT_MODES = 32
MIN_SAMPLES = 100
MAX_ANGLE_GAP = math.pi / 4.0
MAX_PERIOD = 64
PERIOD_TOL = 1e-7


def fourier_design(angles: np.ndarray, modes: int) -> np.ndarray:
    """Columns 1, cos kψ, sin kψ for k = 1..modes."""

    columns = [np.ones_like(angles)]
    for k in range(1, modes + 1):
        columns.append(np.cos(k * angles))
        columns.append(np.sin(k * angles))
    return np.column_stack(columns)


@dataclass(frozen=True)
class CircleModel:
    """Closed curve given as a Fourier graph over an angle.

    For annulus data (φ, r) the graph is r = g(φ). For spatial data the curve is
    c + ρ(ψ)(cos ψ e1 + sin ψ e2) + h(ψ) n around the centroid c, with (e1, e2, n)
    a principal-axes frame.
    """

    kind: str
    modes: int
    coefficients: np.ndarray
    residual: float
    winding: int
    center: Optional[np.ndarray] = None
    frame: Optional[np.ndarray] = None

    def angles_of(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        if self.kind == "annulus":
            return np.mod(points[:, 0], TWO_PI)
        local = (points - self.center) @ self.frame
        return np.mod(np.arctan2(local[:, 1], local[:, 0]), TWO_PI)

    def evaluate(self, angles: np.ndarray) -> np.ndarray:
        design = fourier_design(np.asarray(angles, dtype=float), self.modes)
        values = design @ self.coefficients
        if self.kind == "annulus":
            return np.column_stack([angles, values])
        radius, height = values[:, 0], values[:, 1]
        e1, e2, normal = self.frame[:, 0], self.frame[:, 1], self.frame[:, 2]
        return (
            self.center
            + radius[:, None] * (np.cos(angles)[:, None] * e1 + np.sin(angles)[:, None] * e2)
            + height[:, None] * normal
        )

    def sample(self, n: int = 512) -> np.ndarray:
        return self.evaluate(np.linspace(0.0, TWO_PI, n, endpoint=False))

    def min_distance(self, point: Sequence[float], n: int = 2048) -> float:
        curve = self.sample(n)
        return float(np.min(np.linalg.norm(curve - np.asarray(point, dtype=float), axis=1)))


def principal_frame(points: np.ndarray) -> np.ndarray:
    """Orthonormal columns (e1, e2, n) from the SVD of the centred points."""

    centred = points - points.mean(axis=0)
    _, _, vt = np.linalg.svd(centred, full_matrices=True)
    frame = vt.T.copy()
    if np.linalg.det(frame) < 0.0:
        frame[:, 2] = -frame[:, 2]
    return frame


def cyclic_order_preserved(angles: np.ndarray) -> bool:
    """True if x_i ↦ x_{i+1} shifts the angular ranks by a constant (mod n)."""

    ranks = np.empty(len(angles) - 1, dtype=int)
    ranks[np.argsort(angles[:-1], kind="stable")] = np.arange(len(angles) - 1)
    image_ranks = np.empty(len(angles) - 1, dtype=int)
    image_ranks[np.argsort(angles[1:], kind="stable")] = np.arange(len(angles) - 1)
    # rank of x_{i+1} among the images versus rank of x_i among the sources
    shifts = np.mod(image_ranks - ranks, len(angles) - 1)
    return bool(np.all(shifts == shifts[0]))


def invariant_circle_fit(
    samples: np.ndarray,
    modes: int = DEFAULT_MODES,
    annulus: bool = False,
    ordered: bool = True,
) -> CircleModel:
    """Least-squares Fourier graph through converged section points.

    With *ordered* the samples are consecutive iterates and the map must keep
    their cyclic order, which fails once the curve starts to fold.
    """

    points = np.asarray(samples, dtype=float)
    if points.ndim != 2 or points.shape[0] < MIN_SAMPLES:
        raise ValueError(f"Need at least {MIN_SAMPLES} samples, got {points.shape[0] if points.ndim == 2 else 0}")
    if points.shape[0] < 2 * modes + 1:
        raise ValueError(f"{modes} modes need at least {2 * modes + 1} samples")

    if annulus:
        if points.shape[1] != 2:
            raise ValueError("Annulus samples must be (phi, r) pairs.")
        angles = np.mod(points[:, 0], TWO_PI)
        targets = points[:, 1:2]
        center, frame = None, None
    else:
        center = points.mean(axis=0)
        frame = principal_frame(points)
        local = (points - center) @ frame
        angles = np.mod(np.arctan2(local[:, 1], local[:, 0]), TWO_PI)
        radius = np.hypot(local[:, 0], local[:, 1])
        if np.min(radius) <= 1e-12:
            raise FitFailed("Samples pass through the centroid; not a graph over angle", residual=math.inf)
        targets = np.column_stack([radius, local[:, 2]])

    gaps = np.diff(np.concatenate([np.sort(angles), [np.min(angles) + TWO_PI]]))
    if np.max(gaps) > MAX_ANGLE_GAP:
        raise FitFailed(
            f"Samples leave an angular gap of {np.max(gaps):.3g} rad; the curve does not wind once",
            residual=math.inf,
        )
    if ordered and not cyclic_order_preserved(angles):
        raise FitFailed("Iterates do not preserve their cyclic order; no invariant circle", residual=math.inf)

    design = fourier_design(angles, modes)
    coefficients, *_ = np.linalg.lstsq(design, targets, rcond=None)
    if annulus:
        coefficients = coefficients[:, 0]
        residual = float(np.max(np.abs(design @ coefficients - targets[:, 0])))
    else:
        fitted = design @ coefficients
        residual = float(np.max(np.linalg.norm(fitted - targets, axis=1)))

    model = CircleModel(
        kind="annulus" if annulus else "spatial",
        modes=modes,
        coefficients=coefficients,
        residual=residual,
        winding=1,
        center=center,
        frame=frame,
    )
    logger.debug("Circle fit with %s modes over %s samples: residual %.3e", modes, len(points), residual)
    return model


def birkhoff_weights(n: int) -> np.ndarray:
    """Weights exp(−1/(t(1−t))) on t ∈ (0, 1), normalised to sum 1."""

    t = (np.arange(n) + 0.5) / n
    weights = np.exp(-1.0 / (t * (1.0 - t)))
    return weights / weights.sum()


def detect_period(orbit: np.ndarray, max_period: int = MAX_PERIOD, tol: float = PERIOD_TOL) -> Optional[int]:
    """Smallest q with ‖x_{i+q} − x_i‖ < tol over the last 2q points, or None."""

    n = orbit.shape[0]
    scale = max(1.0, float(np.max(np.abs(orbit[-1]))))
    for q in range(1, min(max_period, (n - 1) // 3) + 1):
        tail = orbit[-(2 * q + 1):]
        if np.max(np.linalg.norm(tail[q:] - tail[:-q], axis=1)) < tol * scale:
            return q
    return None


def wrapped_increments(angles: np.ndarray) -> np.ndarray:
    """Angle increments, each taken on the branch centred at their circular mean."""

    raw = np.diff(angles)
    mean = math.atan2(float(np.sum(np.sin(raw))), float(np.sum(np.cos(raw))))
    return mean + np.mod(raw - mean + math.pi, TWO_PI) - math.pi


def rotation_of_angles(angles: np.ndarray, period: Optional[int] = None) -> float:
    """Rotation number in turns per iterate, reduced to [0, 1)."""

    if len(angles) < 3:
        raise Undefined("Rotation number needs at least three iterates.")
    increments = wrapped_increments(np.asarray(angles, dtype=float))
    if period is not None:
        turns = float(np.sum(increments[-period:])) / TWO_PI
        p_num = round(turns)
        return float(np.mod(p_num / period, 1.0))
    weights = birkhoff_weights(len(increments))
    return float(np.mod(np.sum(weights * increments) / TWO_PI, 1.0))


def section_angles(orbit: np.ndarray, velocity: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> np.ndarray:
    """Angles of spatial section points about their centroid in the principal plane.

    *velocity* orients the plane so that the flow turns counter-clockwise.
    """

    center = orbit.mean(axis=0)
    frame = principal_frame(orbit)
    local = (orbit - center) @ frame
    if velocity is not None:
        sample = orbit[:: max(1, len(orbit) // 64)]
        spin = 0.0
        for x in sample:
            u = (x - center) @ frame
            du = velocity(x) @ frame
            spin += u[0] * du[1] - u[1] * du[0]
        if spin < 0.0:
            local[:, 1] = -local[:, 1]
    return np.arctan2(local[:, 1], local[:, 0])


def rotation_number_of_orbit(
    orbit: np.ndarray,
    annulus: bool = False,
    velocity: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    require_order: bool = True,
) -> float:
    """Rotation number of a converged orbit of a section map; raises Undefined without circle structure."""

    orbit = np.asarray(orbit, dtype=float)
    if not np.all(np.isfinite(orbit)):
        raise Undefined("Orbit contains non-finite points.")
    period = detect_period(orbit)
    angles = orbit[:, 0] if annulus else section_angles(orbit, velocity)
    if period is not None:
        return rotation_of_angles(angles, period)
    if require_order and not cyclic_order_preserved(np.mod(angles, TWO_PI)):
        raise Undefined("Orbit does not preserve cyclic order; no invariant circle")
    return rotation_of_angles(angles)


def rotation_number(
    p: SystemParams,
    s0: State4,
    n_iter: int,
    cfg: Optional[IntegratorConfig] = None,
    transient: int = 0,
) -> float:
    """Rotation number of the stroboscopic orbit of *s0* after *transient* iterates."""

    section = StroboscopicMap(p, s0.theta, cfg)
    x = s0.spatial
    for _ in range(transient):
        x = section.step(x)
    orbit = section.orbit(x, n_iter)
    return rotation_number_of_orbit(orbit, velocity=lambda y: spatial_rhs(p, y, s0.theta))

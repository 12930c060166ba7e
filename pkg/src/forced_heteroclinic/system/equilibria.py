from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import NonConvergence, NotASaddle
from .params import State4, SystemParams
from .vector_field import planar_residual, spatial_jacobian, spatial_rhs

logger = logging.getLogger("forced_heteroclinic.system.equilibria")

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50
DEDUPE_TOL = 1e-8
HALF_SQRT2 = math.sqrt(2.0) / 2.0

FOCUS_SEEDS: Tuple[Tuple[float, float, float], ...] = (
    (HALF_SQRT2, HALF_SQRT2, 0.0),
    (HALF_SQRT2, -HALF_SQRT2, 0.0),
    (-HALF_SQRT2, HALF_SQRT2, 0.0),
    (-HALF_SQRT2, -HALF_SQRT2, 0.0),
)
PLANE_SEEDS: Tuple[Tuple[str, Tuple[float, float]], ...] = (
    ("v", (0.0, 1.0)),
    ("w", (0.0, -1.0)),
    ("O", (0.0, 0.0)),
)


@dataclass(frozen=True)
class Equilibrium:
    label: str
    location: State4
    eigenvalues: Tuple[complex, ...]
    stability_class: str
    residual: float
    tangential_eigenvalues: Tuple[complex, ...] = field(default=())
    plane_class: Optional[str] = None

    @property
    def point(self) -> np.ndarray:
        return self.location.spatial


@dataclass(frozen=True)
class NodeData:
    """Contraction/expansion rates at the saddles v and w on the attracting sphere."""

    c_v: float
    e_v: float
    c_w: float
    e_w: float

    @property
    def delta_v(self) -> float:
        return self.c_v / self.e_v

    @property
    def delta_w(self) -> float:
        return self.c_w / self.e_w

    @property
    def delta(self) -> float:
        return self.delta_v * self.delta_w


def classify_eigenvalues(eigenvalues: Sequence[complex], tol: float = 1e-12) -> str:
    values = np.asarray(eigenvalues, dtype=complex)
    if np.any(np.abs(values.imag) > tol):
        return "focus"
    real = values.real
    if np.all(real < 0.0):
        return "sink"
    if np.all(real > 0.0):
        return "source"
    return "saddle"


def tangential_eigenvalues(jac: np.ndarray, x: np.ndarray) -> Tuple[complex, ...]:
    """Eigenvalues of *jac* with the most radial eigen-direction removed."""

    values, vectors = np.linalg.eig(jac)
    norm = np.linalg.norm(x)
    if norm == 0.0:
        return tuple(complex(v) for v in values)
    radial = x / norm
    alignment = np.abs(radial @ vectors) / np.linalg.norm(vectors, axis=0)
    keep = [i for i in range(len(values)) if i != int(np.argmax(alignment))]
    return tuple(complex(values[i]) for i in keep)


def _planar_newton(p: SystemParams, seed: Tuple[float, float]) -> Optional[np.ndarray]:
    z = np.array(seed, dtype=float)
    for _ in range(NEWTON_MAX_ITER):
        f = np.array(planar_residual(p, z[0], z[1]))
        if np.max(np.abs(f)) < NEWTON_TOL * 1e-2:
            break
        full = spatial_jacobian(p, np.array([z[0], 0.0, z[1]]), 0.0)
        jac = full[np.ix_([0, 2], [0, 2])]
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            return None
        length = np.linalg.norm(step)
        if length > 0.5:
            step *= 0.5 / length
        z = z + step
        if length < 1e-16:
            break
    f = np.array(planar_residual(p, z[0], z[1]))
    if not np.all(np.isfinite(z)) or np.max(np.abs(f)) >= NEWTON_TOL:
        return None
    return z


def _spatial_newton(p: SystemParams, seed: Sequence[float]) -> Optional[np.ndarray]:
    x = np.array(seed, dtype=float)
    for _ in range(NEWTON_MAX_ITER):
        f = spatial_rhs(p, x, 0.0)
        if np.max(np.abs(f)) < NEWTON_TOL * 1e-2:
            break
        try:
            step = np.linalg.solve(spatial_jacobian(p, x, 0.0), -f)
        except np.linalg.LinAlgError:
            return None
        length = np.linalg.norm(step)
        if length > 0.5:
            step *= 0.5 / length
        x = x + step
        if length < 1e-16:
            break
    if not np.all(np.isfinite(x)) or np.max(np.abs(spatial_rhs(p, x, 0.0))) >= NEWTON_TOL:
        return None
    return x


def _make_equilibrium(p: SystemParams, label: str, x: np.ndarray) -> Equilibrium:
    jac = spatial_jacobian(p, x, 0.0)
    eigenvalues = tuple(complex(v) for v in np.linalg.eigvals(jac))
    plane_class = None
    if x[1] == 0.0:
        plane_class = classify_eigenvalues(np.linalg.eigvals(jac[np.ix_([0, 2], [0, 2])]))
    residual = float(np.max(np.abs(spatial_rhs(p, x, 0.0))))
    return Equilibrium(
        label=label,
        location=State4(x[0], x[1], x[2], 0.0),
        eigenvalues=eigenvalues,
        stability_class=classify_eigenvalues(eigenvalues),
        residual=residual,
        tangential_eigenvalues=tangential_eigenvalues(jac, x),
        plane_class=plane_class,
    )


def _is_new(x: np.ndarray, found: List[Equilibrium]) -> bool:
    return all(np.linalg.norm(x - eq.point) > DEDUPE_TOL for eq in found)


def find_equilibria(p: SystemParams, grid_size: int = 7, grid_extent: float = 1.2) -> List[Equilibrium]:
    """Equilibria of the autonomous field (μ = 0).

    In-plane roots (O, v, w) come from Newton on (F1, F2) in {x2 = 0}, seeded at
    the ν = 0 roots and on a coarse grid; the four foci come from spatial Newton
    seeded at (±√2/2, ±√2/2, 0).
    """

    if p.mu != 0.0:
        raise ValueError("Equilibria are only defined for the autonomous field (mu = 0).")

    found: List[Equilibrium] = []
    tried: List[Tuple[float, ...]] = []

    for label, seed in PLANE_SEEDS:
        tried.append((seed[0], 0.0, seed[1]))
        root = _planar_newton(p, seed)
        if root is not None:
            x = np.array([root[0], 0.0, root[1]])
            if _is_new(x, found):
                found.append(_make_equilibrium(p, label, x))

    axis = np.linspace(-grid_extent, grid_extent, grid_size)
    for x1 in axis:
        for x3 in axis:
            tried.append((float(x1), 0.0, float(x3)))
            root = _planar_newton(p, (float(x1), float(x3)))
            if root is None:
                continue
            x = np.array([root[0], 0.0, root[1]])
            if _is_new(x, found):
                found.append(_make_equilibrium(p, "plane", x))

    for seed in FOCUS_SEEDS:
        tried.append(seed)
        x = _spatial_newton(p, seed)
        if x is not None and _is_new(x, found):
            found.append(_make_equilibrium(p, "focus", x))

    if not found:
        raise NonConvergence("Newton iteration failed from every seed", seeds=tried)

    logger.info(
        "Found %s equilibria (nu=%s): %s",
        len(found),
        p.nu,
        ", ".join(f"{eq.label}[{eq.stability_class}]" for eq in found),
    )
    return found


def saddle_points(p: SystemParams) -> Tuple[Equilibrium, Equilibrium]:
    """Return (v, w), the continuations of (0, 0, 1) and (0, 0, -1)."""

    equilibria = {eq.label: eq for eq in find_equilibria(p) if eq.label in {"v", "w"}}
    missing = {"v", "w"} - set(equilibria)
    if missing:
        raise NonConvergence(f"Saddle continuation lost for {sorted(missing)}", seeds=[PLANE_SEEDS])
    return equilibria["v"], equilibria["w"]


def saddle_distance(p: SystemParams, points: np.ndarray) -> float:
    """Smallest distance from the sampled *points* to either saddle."""

    points = np.atleast_2d(np.asarray(points, dtype=float))
    return min(float(np.min(np.linalg.norm(points - eq.point, axis=1))) for eq in saddle_points(p))


def _rates(eq: Equilibrium) -> Tuple[float, float]:
    values = eq.tangential_eigenvalues
    if len(values) != 2 or any(abs(v.imag) > 1e-12 for v in values):
        raise NotASaddle(f"{eq.label} has non-real tangential eigenvalues", eigenvalues=values)
    negative = [v.real for v in values if v.real < 0.0]
    positive = [v.real for v in values if v.real > 0.0]
    if len(negative) != 1 or len(positive) != 1:
        raise NotASaddle(f"{eq.label} is not a saddle on the attracting sphere", eigenvalues=values)
    return -negative[0], positive[0]


def node_data(p: SystemParams) -> NodeData:
    """Rates (c_v, e_v, c_w, e_w) with eigenvalues -c_a and e_a on the sphere."""

    v, w = saddle_points(p)
    c_v, e_v = _rates(v)
    c_w, e_w = _rates(w)
    data = NodeData(c_v, e_v, c_w, e_w)
    logger.info(
        "Node data nu=%s: c_v=%.6g e_v=%.6g c_w=%.6g e_w=%.6g delta=%.6g",
        p.nu,
        c_v,
        e_v,
        c_w,
        e_w,
        data.delta,
    )
    return data

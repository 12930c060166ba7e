from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from ..exceptions import FitFailed
from ..integration.integrator import IntegratorConfig
from ..model.return_map import AnalyticReturnMap, ReturnMapModel, return_map_grid
from ..model.xi import XiProfile
from ..plotting.svg import emit_svg
from ..section.circles import CircleModel, detect_period, invariant_circle_fit
from ..section.classify import basin_seeds
from ..section.lyapunov import ESCAPE_ERRORS, qr_run, summarize_logs
from ..section.strobe import StroboscopicMap
from ..system.params import TWO_PI, State4, SystemParams
from ..utils.files import write_csv

logger = logging.getLogger("forced_heteroclinic.pipeline.route")

LEVELS = ("model", "ode")
ROUTE_COLUMNS = [
    "omega",
    "folds",
    "circle_found",
    "circle_residual",
    "lambda1",
    "lambda1_error",
    "locked_period",
]


@dataclass(frozen=True)
class RouteSettings:
    transient: int = 1000
    iterations: int = 1000
    curve_points: int = 512
    ode_curve_points: int = 128
    circle_modes: int = 32
    graph_tol: float = 1e-12
    graph_max_iter: int = 500
    onset_rel_tol: float = 0.01
    seed: int = 0

    def __post_init__(self) -> None:
        if self.iterations < 2:
            raise ValueError("iterations must be at least 2")
        if not 0.0 < self.onset_rel_tol < 1.0:
            raise ValueError("onset_rel_tol must lie in (0, 1)")
        if self.curve_points < 2 * self.circle_modes + 1:
            raise ValueError("curve_points must cover the circle fit")


@dataclass(frozen=True)
class RoutePoint:
    omega: float
    folds: int
    circle: Optional[CircleModel]
    lambda1: float
    lambda1_error: float
    locked_period: Optional[int]
    panel: pd.DataFrame = field(compare=False, repr=False)

    @property
    def circle_found(self) -> bool:
        return self.circle is not None

    def to_row(self) -> dict:
        return {
            "omega": self.omega,
            "folds": self.folds,
            "circle_found": self.circle_found,
            "circle_residual": self.circle.residual if self.circle is not None else math.nan,
            "lambda1": self.lambda1,
            "lambda1_error": self.lambda1_error,
            "locked_period": self.locked_period if self.locked_period is not None else -1,
        }


@dataclass
class RouteReport:
    level: str
    nu: float
    mu: float
    points: List[RoutePoint]
    onset: Optional[Tuple[float, float]]
    files: List[Path] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([point.to_row() for point in self.points], columns=ROUTE_COLUMNS)


def count_folds(increments: np.ndarray) -> int:
    """Cyclic sign changes of the angular increments along a closed curve."""

    signs = np.sign(increments[increments != 0.0])
    if signs.size < 2:
        return 0
    return int(np.count_nonzero(signs != np.roll(signs, 1)))


def closed_lifted_increments(lifted: np.ndarray) -> np.ndarray:
    """Increments of a lifted degree-one curve, including the closing step."""

    return np.diff(np.concatenate([lifted, [lifted[0] + TWO_PI]]))


def closed_wrapped_increments(angles: np.ndarray) -> np.ndarray:
    steps = np.diff(np.concatenate([angles, [angles[0]]]))
    return np.mod(steps + math.pi, TWO_PI) - math.pi


def _regraph(image_phi: np.ndarray, image_r: np.ndarray, phi: np.ndarray) -> np.ndarray:
    wrapped = np.mod(image_phi, TWO_PI)
    order = np.argsort(wrapped, kind="stable")
    return np.interp(phi, wrapped[order], image_r[order], period=TWO_PI)


def graph_transform(
    model: ReturnMapModel,
    phi: np.ndarray,
    graph: np.ndarray,
    settings: RouteSettings,
) -> Tuple[Optional[np.ndarray], np.ndarray]:
    """Iterate the graph r = g(φ) under R while its image stays a graph.

    Returns (invariant graph or None, last graph whose image was examined).
    """

    current = np.asarray(graph, dtype=float)
    for iteration in range(settings.graph_max_iter):
        image_phi, image_r = return_map_grid(model, phi, current)
        if np.any(closed_lifted_increments(image_phi) <= 0.0):
            logger.debug("omega=%.6g: image folds after %s graph iterations", model.omega, iteration)
            return None, current
        updated = _regraph(image_phi, image_r, phi)
        change = float(np.max(np.abs(updated - current)))
        current = updated
        if change < settings.graph_tol:
            return current, current
    logger.warning("omega=%.6g: graph transform did not settle in %s iterations", model.omega, settings.graph_max_iter)
    return None, current


def _model_folds(model: ReturnMapModel, phi: np.ndarray, graph: np.ndarray) -> int:
    image_phi, _ = return_map_grid(model, phi, graph)
    return count_folds(closed_lifted_increments(image_phi))


def circle_periodic_points(
    model: ReturnMapModel,
    phi: np.ndarray,
    graph: np.ndarray,
    q: int,
) -> pd.DataFrame:
    """Period-q points of R restricted to the invariant graph, labelled sink or saddle."""

    def lift_q(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        for _ in range(q):
            r = np.interp(x, phi, graph, period=TWO_PI)
            x, _ = return_map_grid(model, x, r)
        return x

    images = lift_q(phi)
    turns = round(float(np.mean(images - phi)) / TWO_PI)
    offset = images - phi - TWO_PI * turns

    def h(x: float) -> float:
        return float(lift_q(np.array([x]))[0] - x - TWO_PI * turns)

    rows = []
    crossings = np.nonzero(np.sign(offset[:-1]) * np.sign(offset[1:]) < 0.0)[0]
    for i in crossings:
        root = brentq(h, phi[i], phi[i + 1], xtol=1e-14)
        kind = "sink" if offset[i + 1] < offset[i] else "saddle"
        rows.append({"marker_phi": root, "marker_r": float(np.interp(root, phi, graph, period=TWO_PI)), "marker_kind": kind})
    return pd.DataFrame(rows, columns=["marker_phi", "marker_r", "marker_kind"])


def _lyapunov_and_lock(section, x0: np.ndarray, settings: RouteSettings, time_per_iterate: float = 1.0):
    x = np.asarray(x0, dtype=float)
    try:
        for _ in range(settings.transient):
            x = section.step(x)
        logs, orbit = qr_run(section, x, settings.iterations)
    except ESCAPE_ERRORS as exc:
        logger.warning("%s orbit escaped during the route run: %s", section.name, exc)
        return math.nan, math.nan, None, None
    result = summarize_logs(logs, time_per_iterate)
    return result.top, result.top_error, detect_period(orbit), orbit


def _model_point(
    model: ReturnMapModel,
    phi: np.ndarray,
    carried: np.ndarray,
    settings: RouteSettings,
) -> Tuple[RoutePoint, np.ndarray]:
    invariant, last_good = graph_transform(model, phi, carried, settings)
    curve_r = invariant if invariant is not None else last_good
    circle = None
    if invariant is not None:
        try:
            circle = invariant_circle_fit(np.column_stack([phi, invariant]), settings.circle_modes, annulus=True, ordered=False)
        except FitFailed as exc:
            logger.info("omega=%.6g: %s", model.omega, exc)

    image_phi, image_r = return_map_grid(model, phi, curve_r)
    folds = count_folds(closed_lifted_increments(image_phi))
    lambda1, error, period, _ = _lyapunov_and_lock(
        AnalyticReturnMap(model), np.array([phi[0], curve_r[0]]), settings
    )
    panel = pd.DataFrame(
        {"phi": phi, "curve_r": curve_r, "image_phi": np.mod(image_phi, TWO_PI), "image_r": image_r}
    )
    if circle is not None and period is not None:
        panel = pd.concat([panel, circle_periodic_points(model, phi, curve_r, period)], axis=1)
    point = RoutePoint(model.omega, folds, circle, lambda1, error, period, panel)
    return point, curve_r


def _frame_coordinates(circle: CircleModel, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    local = (np.atleast_2d(points) - circle.center) @ circle.frame
    return np.mod(np.arctan2(local[:, 1], local[:, 0]), TWO_PI), np.hypot(local[:, 0], local[:, 1])


def _ode_folds(section: StroboscopicMap, curve: CircleModel, n: int) -> Tuple[int, np.ndarray, np.ndarray]:
    samples = curve.sample(n)
    images = np.array([section.step(x) for x in samples])
    angles, _ = _frame_coordinates(curve, images)
    return count_folds(closed_wrapped_increments(angles)), samples, images


def _ode_point(
    p: SystemParams,
    seed: State4,
    carried: Optional[CircleModel],
    settings: RouteSettings,
    cfg: IntegratorConfig,
) -> Tuple[RoutePoint, CircleModel]:
    section = StroboscopicMap(p, seed.theta, cfg)
    lambda1, error, period, orbit = _lyapunov_and_lock(section, seed.spatial, settings, section.flight_time)
    circle = None
    if orbit is not None:
        try:
            circle = invariant_circle_fit(orbit, settings.circle_modes)
        except (FitFailed, ValueError) as exc:
            logger.info("omega=%.6g: no invariant curve (%s)", p.omega, exc)
    curve = circle if circle is not None else carried
    if curve is None:
        raise FitFailed(f"No invariant curve at the smallest omega={p.omega:.6g}", residual=math.inf)

    try:
        folds, samples, images = _ode_folds(section, curve, settings.ode_curve_points)
    except ESCAPE_ERRORS as exc:
        logger.warning("omega=%.6g: image of the reference curve escaped: %s", p.omega, exc)
        folds, samples, images = -1, curve.sample(settings.ode_curve_points), None
    curve_phi, curve_r = _frame_coordinates(curve, samples)
    if images is not None:
        image_phi, image_r = _frame_coordinates(curve, images)
    else:
        image_phi = image_r = np.full(len(samples), math.nan)
    panel = pd.DataFrame({"phi": curve_phi, "curve_r": curve_r, "image_phi": image_phi, "image_r": image_r})
    if period is not None and orbit is not None:
        marker_phi, marker_r = _frame_coordinates(curve, orbit[-period:])
        markers = pd.DataFrame({"marker_phi": marker_phi, "marker_r": marker_r, "marker_kind": "sink"})
        panel = pd.concat([panel, markers], axis=1)
    return RoutePoint(p.omega, folds, circle, lambda1, error, period, panel), curve


def bracket_onset(
    folds_at: Callable[[float], int],
    lo: float,
    hi: float,
    rel_tol: float = 0.01,
) -> Tuple[float, float]:
    """Shrink [lo, hi] with folds_at(lo) == 0 < folds_at(hi) until hi − lo ≤ rel_tol · hi."""

    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if folds_at(mid) > 0:
            hi = mid
        else:
            lo = mid
    return lo, hi


def _first_fold_bracket(points: Sequence[RoutePoint]) -> Optional[int]:
    for i in range(1, len(points)):
        if points[i - 1].folds == 0 and points[i].folds > 0:
            return i
    return None


def route_report(
    nu: float,
    mu: float,
    omegas: Sequence[float],
    output_dir: Path,
    level: str = "model",
    settings: Optional[RouteSettings] = None,
    model: Optional[ReturnMapModel] = None,
    params: Optional[SystemParams] = None,
    cfg: Optional[IntegratorConfig] = None,
) -> RouteReport:
    """Follow the reference curve and its image along increasing ω; one SVG panel per ω plus a summary CSV.

    *model* supplies rates and block sizes for the model level, *params* α and β for the ODE level;
    ν and μ always come from the arguments.
    """

    if level not in LEVELS:
        raise ValueError(f"Unsupported level: {level}. Allowed: {', '.join(LEVELS)}")
    if not (nu > 0.0 and mu > 0.0):
        raise ValueError("The route needs nu > 0 and mu > 0")
    omegas = sorted(float(w) for w in omegas)
    if len(omegas) < 2 or omegas[0] <= 0.0:
        raise ValueError("Provide at least two positive omega values")
    settings = settings or RouteSettings()
    cfg = cfg or IntegratorConfig()
    output_dir = Path(output_dir)

    points: List[RoutePoint] = []
    references: list = []
    if level == "model":
        base = model or ReturnMapModel()
        base = base.with_xi(XiProfile(nu, mu, base.xi.cos_coefficients, base.xi.sin_coefficients))
        phi = np.linspace(0.0, TWO_PI, settings.curve_points, endpoint=False)
        carried = np.full_like(phi, 1.0 + 0.5 * base.eps_v)
        for omega in omegas:
            point, carried = _model_point(base.with_omega(omega), phi, carried, settings)
            points.append(point)
            references.append(carried)
            logger.info("model omega=%.6g: folds=%s circle=%s lambda1=%.4g", omega, point.folds, point.circle_found, point.lambda1)
    else:
        base_p = (params or SystemParams()).with_(nu=nu, mu=mu)
        seed = basin_seeds(base_p, 1, np.random.default_rng(settings.seed))[0]
        curve: Optional[CircleModel] = None
        for omega in omegas:
            point, curve = _ode_point(base_p.with_(omega=omega), seed, curve, settings, cfg)
            points.append(point)
            references.append(curve)
            logger.info("ode omega=%.6g: folds=%s circle=%s lambda1=%.4g", omega, point.folds, point.circle_found, point.lambda1)

    index = _first_fold_bracket(points)
    onset = None
    if index is None:
        logger.info("No fold onset between omega=%.6g and omega=%.6g", omegas[0], omegas[-1])
    else:
        start = references[index - 1]
        if level == "model":

            def folds_at(omega: float) -> int:
                shifted = base.with_omega(omega)
                invariant, last_good = graph_transform(shifted, phi, start, settings)
                return 0 if invariant is not None else _model_folds(shifted, phi, last_good)

        else:

            def folds_at(omega: float) -> int:
                return _ode_point(base_p.with_(omega=omega), seed, start, settings, cfg)[0].folds

        onset = bracket_onset(folds_at, omegas[index - 1], omegas[index], settings.onset_rel_tol)
        logger.info("Fold onset bracketed in [%.6g, %.6g]", *onset)

    report = RouteReport(level, nu, mu, points, onset)
    report.files = _write_outputs(report, output_dir)
    return report


def _write_outputs(report: RouteReport, output_dir: Path) -> List[Path]:
    files: List[Path] = []
    labels = ("phi", "r") if report.level == "model" else ("psi", "rho")
    for i, point in enumerate(report.points):
        note = f"omega={point.omega:.6g}  folds={point.folds}"
        if not point.circle_found:
            note += "\nno invariant curve"
        files.append(
            emit_svg(
                point.panel,
                "route",
                output_dir / f"route_{report.level}_{i:03d}.svg",
                title=f"{report.level} level, nu={report.nu:g}, mu={report.mu:g}",
                labels=labels,
                annotation=note,
            )
        )
    frame = report.to_frame()
    files.append(
        emit_svg(
            frame,
            "line",
            output_dir / f"route_{report.level}_folds.svg",
            columns={"x": "omega", "y": "folds"},
            title="fold count of R(C)",
            labels=("omega", "folds"),
            annotation="" if report.onset is None else "onset in [{:.6g}, {:.6g}]".format(*report.onset),
        )
    )
    files.append(write_csv(frame, output_dir / f"route_{report.level}_summary.csv"))
    if report.onset is not None:
        onset = pd.DataFrame([{"onset_lo": report.onset[0], "onset_hi": report.onset[1]}])
        files.append(write_csv(onset, output_dir / f"route_{report.level}_onset.csv"))
    return files

from __future__ import annotations

import itertools
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np
import pandas as pd

from ..exceptions import Escaped, ForcedHeteroclinicError, SchemaMismatch, Undefined
from ..horseshoe.conley_moser import verify_conley_moser
from ..integration.integrator import IntegratorConfig
from ..model.return_map import AnalyticReturnMap, ReturnMapModel
from ..model.xi import XiProfile
from ..plotting.svg import emit_svg
from ..section.circles import detect_period, rotation_number_of_orbit
from ..section.classify import SUMMARY_COLUMNS, ClassifierSettings, basin_seeds, classify_attractor
from ..section.lyapunov import ESCAPE_ERRORS, lyapunov_spectrum, map_lyapunov
from ..section.strobe import StroboscopicMap
from ..system.params import TWO_PI, SystemParams
from ..system.vector_field import spatial_rhs
from ..utils.files import write_csv
from .manifest import RunManifest

logger = logging.getLogger("forced_heteroclinic.pipeline.sweep")

AXIS_NAMES = ("nu", "mu", "omega")
TASKS = ("classify", "lyapunov", "rotation", "horseshoe")
LEVELS = ("ode", "model")

TASK_COLUMNS: Dict[str, List[str]] = {
    "classify": ["grid_index", *SUMMARY_COLUMNS, "period", "circle_residual", "status"],
    "lyapunov": ["grid_index", "nu", "mu", "omega", "seed", "lambda1", "lambda2", "lambda3", "lambda1_error", "status"],
    "rotation": ["grid_index", "nu", "mu", "omega", "seed", "rho", "period", "status"],
    "horseshoe": [
        "grid_index", "nu", "mu", "omega", "seed", "omega0", "passed",
        "p1", "p2", "p3", "lambda_h", "lambda_v", "crossings", "status",
    ],
}

FIGURE_VALUES = {"classify": "lambda1", "lyapunov": "lambda1", "rotation": "rho", "horseshoe": "passed"}


@dataclass(frozen=True)
class SweepSpec:
    """Parameter grid, per-point task and seed policy of one sweep.

    Seeds are derived from (seed, grid index, replicate), so a point's result
    does not depend on which worker ran it or in which order.
    """

    axes: Dict[str, Tuple[float, float, int]]
    task: str = "classify"
    level: str = "ode"
    base: SystemParams = field(default_factory=SystemParams)
    model: ReturnMapModel = field(default_factory=ReturnMapModel)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    classifier: ClassifierSettings = field(default_factory=ClassifierSettings)
    seed: int = 0
    seeds_per_point: int = 1
    horseshoe_grid: Tuple[int, int] = (128, 64)

    def __post_init__(self) -> None:
        if not self.axes:
            raise ValueError("A sweep needs at least one parameter axis.")
        for name, (lo, hi, count) in self.axes.items():
            if name not in AXIS_NAMES:
                raise ValueError(f"Unsupported axis: {name}. Allowed: {', '.join(AXIS_NAMES)}")
            if int(count) < 2:
                raise ValueError(f"Axis {name} needs a grid count >= 2, got {count}")
            if not lo < hi:
                raise ValueError(f"Axis {name} has an empty range [{lo}, {hi}]")
            if name == "omega" and lo <= 0.0:
                raise ValueError("omega must stay positive")
            if name in ("nu", "mu") and lo < 0.0:
                raise ValueError(f"{name} must stay non-negative")
        if self.task not in TASKS:
            raise ValueError(f"Unsupported task: {self.task}. Allowed: {', '.join(TASKS)}")
        if self.level not in LEVELS:
            raise ValueError(f"Unsupported level: {self.level}. Allowed: {', '.join(LEVELS)}")
        if self.task == "classify" and self.level != "ode":
            raise ValueError("classify runs on the ode level only")
        if self.task == "horseshoe" and self.level != "model":
            raise ValueError("horseshoe runs on the model level only")
        if self.seeds_per_point < 1:
            raise ValueError("seeds_per_point must be positive")

    @property
    def columns(self) -> List[str]:
        return TASK_COLUMNS[self.task]

    def grid(self) -> List[Tuple[int, Dict[str, float]]]:
        names = [name for name in AXIS_NAMES if name in self.axes]
        values = [np.linspace(*self.axes[name][:2], int(self.axes[name][2])) for name in names]
        return [(index, dict(zip(names, map(float, combo)))) for index, combo in enumerate(itertools.product(*values))]

    def to_mapping(self) -> Dict[str, Any]:
        return {
            "axes": {name: list(self.axes[name]) for name in sorted(self.axes)},
            "task": self.task,
            "level": self.level,
            "base": self.base.to_mapping(),
            "model": self.model.to_mapping(),
            "integrator": asdict(self.integrator),
            "classifier": asdict(self.classifier),
            "seed": self.seed,
            "seeds_per_point": self.seeds_per_point,
            "horseshoe_grid": list(self.horseshoe_grid),
        }


def _point_params(spec: SweepSpec, values: Mapping[str, float]) -> SystemParams:
    return spec.base.with_(**values)


def _point_model(spec: SweepSpec, p: SystemParams) -> ReturnMapModel:
    xi = XiProfile(p.nu, p.mu, spec.model.xi.cos_coefficients, spec.model.xi.sin_coefficients)
    return spec.model.with_xi(xi).with_omega(p.omega)


def _blank_row(spec: SweepSpec, index: int, p: SystemParams, replicate: int, status: str) -> Dict[str, Any]:
    row: Dict[str, Any] = {column: math.nan for column in spec.columns}
    row.update({"grid_index": index, "nu": p.nu, "mu": p.mu, "omega": p.omega, "seed": replicate, "status": status})
    if "period" in row:
        row["period"] = -1
    return row


def _model_start(spec: SweepSpec, rng: np.random.Generator) -> np.ndarray:
    return np.array([rng.uniform(0.0, TWO_PI), 1.0 + 0.5 * spec.model.eps_v])


def _classify_row(spec: SweepSpec, index: int, p: SystemParams, replicate: int, rng: np.random.Generator) -> Dict[str, Any]:
    s0 = basin_seeds(p, 1, rng)[0]
    summary = classify_attractor(p, s0, spec.integrator, spec.classifier, seed=replicate)
    row = _blank_row(spec, index, p, replicate, "ok")
    row.update(summary.to_row())
    row["period"] = summary.period if summary.period is not None else -1
    row["circle_residual"] = summary.circle_residual
    return row


def _lyapunov_row(spec: SweepSpec, index: int, p: SystemParams, replicate: int, rng: np.random.Generator) -> Dict[str, Any]:
    row = _blank_row(spec, index, p, replicate, "ok")
    settings = spec.classifier
    try:
        if spec.level == "ode":
            s0 = basin_seeds(p, 1, rng)[0]
            result = lyapunov_spectrum(p, s0, settings.iterations, settings.transient, spec.integrator)
        else:
            section = AnalyticReturnMap(_point_model(spec, p))
            result = map_lyapunov(section, _model_start(spec, rng), settings.iterations, settings.transient)
    except Escaped as exc:
        logger.warning("Sweep point %s escaped: %s", index, exc)
        row["status"] = "escaped"
        return row
    for i, value in enumerate(result.exponents[:3]):
        row[f"lambda{i + 1}"] = value
    row["lambda1_error"] = result.top_error
    return row


def _rotation_row(spec: SweepSpec, index: int, p: SystemParams, replicate: int, rng: np.random.Generator) -> Dict[str, Any]:
    row = _blank_row(spec, index, p, replicate, "ok")
    settings = spec.classifier
    if spec.level == "ode":
        s0 = basin_seeds(p, 1, rng)[0]
        section = StroboscopicMap(p, s0.theta, spec.integrator)
        x0, annulus = s0.spatial, False

        def velocity(y: np.ndarray) -> np.ndarray:
            return spatial_rhs(p, y, s0.theta)

    else:
        section = AnalyticReturnMap(_point_model(spec, p))
        x0, annulus, velocity = _model_start(spec, rng), True, None
    try:
        x = x0
        for _ in range(settings.transient):
            x = section.step(x)
        orbit = section.orbit(x, settings.iterations)
    except ESCAPE_ERRORS as exc:
        logger.warning("Sweep point %s escaped: %s", index, exc)
        row["status"] = "escaped"
        return row
    period = detect_period(orbit, settings.max_period, settings.period_tolerance)
    row["period"] = period if period is not None else -1
    try:
        row["rho"] = rotation_number_of_orbit(orbit, annulus=annulus, velocity=velocity)
    except Undefined as exc:
        row["status"] = f"undefined: {exc}"
    return row


def _horseshoe_row(spec: SweepSpec, index: int, p: SystemParams, replicate: int, rng: np.random.Generator) -> Dict[str, Any]:
    model = _point_model(spec, p)
    n_phi, n_r = spec.horseshoe_grid
    report = verify_conley_moser(model, n_phi=n_phi, n_r=n_r, strict=False)
    row = _blank_row(spec, index, p, replicate, "ok")
    row.update(
        {
            "omega0": report.omega0,
            "passed": report.passed,
            "p1": report.p1_ok,
            "p2": report.p2_ok,
            "p3": report.p3_ok,
            "lambda_h": report.lambda_h,
            "lambda_v": report.lambda_v,
            "crossings": min(report.crossings) if report.crossings else 0,
        }
    )
    return row


_TASK_RUNNERS = {
    "classify": _classify_row,
    "lyapunov": _lyapunov_row,
    "rotation": _rotation_row,
    "horseshoe": _horseshoe_row,
}


def run_point(spec: SweepSpec, index: int, values: Mapping[str, float]) -> List[Dict[str, Any]]:
    """All replicate rows of one grid point; numerical failures become rows with a failure status."""

    p = _point_params(spec, values)
    replicates = 1 if spec.task == "horseshoe" else spec.seeds_per_point
    rows = []
    for replicate in range(replicates):
        rng = np.random.default_rng([spec.seed, index, replicate])
        try:
            rows.append(_TASK_RUNNERS[spec.task](spec, index, p, replicate, rng))
        except (ForcedHeteroclinicError, ValueError) as exc:
            logger.warning("Sweep point %s (%s) failed: %s", index, dict(values), exc)
            rows.append(_blank_row(spec, index, p, replicate, f"failed: {type(exc).__name__}: {exc}"))
    return rows


@dataclass
class SweepResult:
    frame: pd.DataFrame
    csv_path: Path
    manifest_path: Path
    files: List[Path]


@dataclass
class SweepRunner:
    spec: SweepSpec
    workers: int = 1
    logger: logging.Logger = logging.getLogger("forced_heteroclinic.pipeline.sweep")

    def _partial_paths(self, output: Path) -> Tuple[Path, Path]:
        return output.with_name(output.stem + ".partial.csv"), output.with_name(output.stem + ".partial.json")

    def _completed(self, partial: Path, marker: Path, spec_hash: str) -> set:
        if not partial.exists():
            return set()
        if marker.exists():
            with marker.open("r", encoding="utf-8") as handle:
                stored = json.load(handle).get("config_hash")
            if stored != spec_hash:
                raise ValueError(f"{partial} belongs to a different sweep; remove it or change --output")
        frame = pd.read_csv(partial)
        missing = [column for column in self.spec.columns if column not in frame.columns]
        if missing:
            raise SchemaMismatch(f"Partial results in {partial} lack columns {missing}", missing=missing)
        done = set(int(i) for i in frame["grid_index"].unique())
        self.logger.info("Resuming sweep: %s grid points already in %s", len(done), partial)
        return done

    def _append(self, partial: Path, rows: List[Dict[str, Any]]) -> None:
        frame = pd.DataFrame(rows, columns=self.spec.columns)
        frame.to_csv(
            partial,
            mode="a",
            header=not partial.exists(),
            index=False,
            float_format="%.17g",
            encoding="utf-8",
            lineterminator="\n",
        )

    def run(self, output: Path, manifest_path: Optional[Path] = None, figure: bool = True) -> SweepResult:
        output = Path(output)
        output.parent.mkdir(parents=True, exist_ok=True)
        manifest = RunManifest.start(self.spec.to_mapping())
        partial, marker = self._partial_paths(output)
        done = self._completed(partial, marker, manifest.config_hash)
        if not marker.exists():
            with marker.open("w", encoding="utf-8") as handle:
                json.dump({"config_hash": manifest.config_hash}, handle)

        grid = self.spec.grid()
        pending = [(index, values) for index, values in grid if index not in done]
        self.logger.info(
            "Sweep task=%s level=%s: %s grid points, %s pending, %s workers",
            self.spec.task,
            self.spec.level,
            len(grid),
            len(pending),
            self.workers,
        )

        if self.workers <= 1:
            for count, (index, values) in enumerate(pending, start=1):
                self._append(partial, run_point(self.spec, index, values))
                self.logger.info("Sweep point %s done (%s/%s)", index, count, len(pending))
        else:
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                futures = {pool.submit(run_point, self.spec, index, values): index for index, values in pending}
                for count, future in enumerate(as_completed(futures), start=1):
                    self._append(partial, future.result())
                    self.logger.info("Sweep point %s done (%s/%s)", futures[future], count, len(pending))

        frame = pd.read_csv(partial) if partial.exists() else pd.DataFrame(columns=self.spec.columns)
        frame = frame.sort_values(["grid_index", "seed"], kind="stable").reset_index(drop=True)
        csv_path = write_csv(frame, output)
        files = [csv_path]
        if figure:
            svg = sweep_figure(frame, self.spec, output.with_suffix(".svg"))
            if svg is not None:
                files.append(svg)
        partial.unlink(missing_ok=True)
        marker.unlink(missing_ok=True)

        manifest_path = manifest_path or output.with_name(output.stem + ".manifest.json")
        manifest.finish(files).write(manifest_path)
        failed = int(frame["status"].astype(str).str.startswith("failed").sum()) if not frame.empty else 0
        if failed:
            self.logger.warning("%s of %s sweep rows failed; see the status column", failed, len(frame))
        return SweepResult(frame, csv_path, manifest_path, files)


def run_sweep(spec: SweepSpec, output: Path, workers: int = 1, manifest_path: Optional[Path] = None) -> SweepResult:
    return SweepRunner(spec, workers).run(output, manifest_path)


def sweep_figure(frame: pd.DataFrame, spec: SweepSpec, output: Path) -> Optional[Path]:
    """Line plot for one swept axis, heatmap (scatter of classes for classify) for two; none for three."""

    swept = [name for name in AXIS_NAMES if name in spec.axes]
    value = FIGURE_VALUES[spec.task]
    data = frame.copy()
    if value in data.columns:
        data[value] = pd.to_numeric(data[value], errors="coerce").astype(float)
    title = f"{spec.task} sweep ({spec.level})"
    if len(swept) == 1:
        return emit_svg(data, "line", output, columns={"x": swept[0], "y": value}, title=title, labels=(swept[0], value))
    if len(swept) == 2:
        x, y = swept[1], swept[0]
        if spec.task == "classify":
            return emit_svg(data, "scatter", output, columns={"x": x, "y": y, "category": "class"}, title=title, labels=(x, y))
        return emit_svg(data, "heatmap", output, columns={"x": x, "y": y, "value": value}, title=title, labels=(x, y))
    logger.info("No figure for a %s-axis sweep", len(swept))
    return None

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from ..config import ProjectConfig
from ..horseshoe.conley_moser import ConleyMoserReport, verify_conley_moser
from ..horseshoe.domain import build_domain
from ..horseshoe.itinerary import (
    count_crossings,
    entropy_lower_bound,
    measured_entropy,
    observed_windings,
    realize_all_words,
)
from ..integration.integrator import Trajectory, integrate
from ..model.bounds import contraction_bound, contraction_sup, expansion_inf, omega0
from ..model.return_map import AnalyticReturnMap
from ..plotting.svg import emit_svg, strobe_scatter_frame
from ..section.circles import rotation_number
from ..section.classify import OrbitSummary, basin_seeds, classify_many
from ..section.lyapunov import LyapunovResult, lyapunov_spectrum
from ..section.strobe import SectionMapSample, strobe_sample
from ..system.equilibria import find_equilibria
from ..system.params import State4
from ..utils.files import ensure_parent_dir, timestamped_filename, write_csv
from .manifest import RunManifest
from .route import RouteReport, RouteSettings, route_report
from .sweep import SweepResult, SweepRunner, SweepSpec

EQUILIBRIA_COLUMNS = ["label", "x1", "x2", "x3", "stability", "residual", "eigenvalues", "plane_class"]
STROBE_COLUMNS = ["n", "x1", "x2", "x3", "t"]


@dataclass
class Laboratory:
    config: ProjectConfig
    logger: logging.Logger = logging.getLogger("forced_heteroclinic.pipeline.orchestrator")

    def default_state(self) -> State4:
        p = self.config.to_params()
        rng = np.random.default_rng(self.config.section.seed)
        return basin_seeds(p, 1, rng, self.config.section.theta_star)[0]

    def run_equilibria(self) -> pd.DataFrame:
        p = self.config.to_params()
        rows = []
        for eq in find_equilibria(p):
            x = eq.point
            rows.append(
                {
                    "label": eq.label,
                    "x1": x[0],
                    "x2": x[1],
                    "x3": x[2],
                    "stability": eq.stability_class,
                    "residual": eq.residual,
                    "eigenvalues": " ".join(f"{complex(v):.12g}" for v in eq.eigenvalues),
                    "plane_class": eq.plane_class or "",
                }
            )
        self.logger.info("Found %s equilibria at nu=%s mu=%s", len(rows), p.nu, p.mu)
        return pd.DataFrame(rows, columns=EQUILIBRIA_COLUMNS)

    def run_integrate(self, s0: State4, t_end: float, samples: int = 1000) -> Trajectory:
        p = self.config.to_params()
        t_eval = np.linspace(0.0, t_end, samples)
        return integrate(p, s0, self.config.integrator.to_config(), t_end, t_eval=t_eval)

    def run_strobe(self, s0: State4, iterates: int, transient: int = 0) -> pd.DataFrame:
        p = self.config.to_params()
        cfg = self.config.integrator.to_config()
        state = s0
        for _ in range(transient):
            state = strobe_sample(p, state, cfg).output
        rows = [(transient, *state.spatial, transient * p.strobe_period)]
        for n in range(transient + 1, transient + iterates + 1):
            sample: SectionMapSample = strobe_sample(p, state, cfg)
            state = sample.output
            rows.append((n, *state.spatial, rows[-1][-1] + sample.flight_time))
        return pd.DataFrame(rows, columns=STROBE_COLUMNS)

    def run_classify(self, seeds: Optional[int] = None, figure: Optional[Path] = None) -> pd.DataFrame:
        p = self.config.to_params()
        rng = np.random.default_rng(self.config.section.seed)
        starts = basin_seeds(p, seeds or self.config.section.seeds, rng, self.config.section.theta_star)
        summaries: List[OrbitSummary] = classify_many(
            p, starts, self.config.integrator.to_config(), self.config.section.to_settings()
        )
        frame = pd.DataFrame([s.to_row() for s in summaries])
        if figure is not None:
            points = np.array([s.final_point for s in summaries if s.final_point is not None]).reshape(-1, 3)
            labels = [s.label for s in summaries if s.final_point is not None]
            emit_svg(strobe_scatter_frame(points, labels), "scatter", figure, title="attractors", labels=("x1", "x3"))
        return frame

    def run_lyapunov(self, s0: State4, iterations: Optional[int] = None, transient: Optional[int] = None) -> LyapunovResult:
        section = self.config.section
        return lyapunov_spectrum(
            self.config.to_params(),
            s0,
            iterations or section.iterations,
            section.transient if transient is None else transient,
            self.config.integrator.to_config(),
        )

    def run_rotation(self, s0: State4) -> float:
        section = self.config.section
        return rotation_number(
            self.config.to_params(), s0, section.iterations, self.config.integrator.to_config(), section.transient
        )

    def run_model_return_map(self, phi0: float, r0: float, iterates: int) -> pd.DataFrame:
        section = AnalyticReturnMap(self.config.to_model())
        orbit = section.orbit(np.array([phi0, r0]), iterates)
        return pd.DataFrame({"n": np.arange(iterates + 1), "phi": orbit[:, 0], "r": orbit[:, 1]})

    def run_omega0(self) -> Dict[str, Any]:
        model = self.config.to_model()
        domain = build_domain(model, self.config.horseshoe.margin, self.config.horseshoe.strip_count)
        window = (domain.phi_l, domain.phi_r)
        xi_l = float(model.xi.value(domain.phi_l))
        threshold = omega0(model, window)
        return {
            "phi_l": domain.phi_l,
            "phi_r": domain.phi_r,
            "xi_l": xi_l,
            "xi_r": float(model.xi.value(domain.phi_r)),
            "K": model.K,
            "delta": model.delta,
            "omega0": threshold,
            "omega_ceil": float(math.ceil(threshold)),
            "contraction_bound": contraction_bound(model, xi_l),
            "contraction_sup": contraction_sup(model, xi_l),
            "expansion_inf": expansion_inf(model.with_omega(max(model.omega, threshold)), window),
            "globally_defined": model.globally_defined,
        }

    def run_horseshoe(
        self,
        omega: Optional[float] = None,
        output_dir: Optional[Path] = None,
        itineraries: bool = True,
        timestamp: Optional[str] = None,
    ) -> Dict[str, Any]:
        cfg = self.config.horseshoe
        model = self.config.to_model()
        domain = build_domain(model, cfg.margin, cfg.strip_count)
        omega = omega or cfg.omega or float(math.ceil(omega0(model, (domain.phi_l, domain.phi_r))))
        report: ConleyMoserReport = verify_conley_moser(
            model,
            domain,
            omega=omega,
            n_phi=cfg.n_phi,
            n_r=cfg.n_r,
            strip_samples=cfg.strip_samples,
            refine=cfg.refine,
            strict=False,
        )
        summary = report.summary()
        if report.passed:
            summary["entropy_lower_bound"] = entropy_lower_bound(report)
            summary["measured_entropy"] = measured_entropy(report)
            summary["total_crossings"] = count_crossings(report)
            if itineraries:
                results = realize_all_words(report, cfg.itinerary_length)
                summary["itineraries_realised"] = len(results)
                summary["max_shadow_residual"] = max(r.max_residual for r in results)
                summary["observed_windings"] = observed_windings(results)

        output_dir = Path(output_dir or self.config.paths.reports_dir)
        stem = timestamped_filename("horseshoe_{timestamp}", timestamp)
        strips_path = write_csv(report.strips_frame(), output_dir / f"{stem}_strips.csv")
        report_path = ensure_parent_dir(output_dir / f"{stem}.json")
        with report_path.open("w", encoding="utf-8") as handle:
            json.dump(summary, handle, indent=2, ensure_ascii=False)
        self.logger.info("Horseshoe report saved to %s", report_path)
        return {"report": report, "summary": summary, "files": [report_path, strips_path]}

    def sweep_spec(self) -> SweepSpec:
        sweep = self.config.sweep
        return SweepSpec(
            axes={name: tuple(axis) for name, axis in sweep.axes.items()},
            task=sweep.task,
            level=sweep.level,
            base=self.config.to_params(),
            model=self.config.to_model(),
            integrator=self.config.integrator.to_config(),
            classifier=self.config.section.to_settings(),
            seed=sweep.seed,
            seeds_per_point=sweep.seeds_per_point,
            horseshoe_grid=(self.config.horseshoe.n_phi, self.config.horseshoe.n_r),
        )

    def run_sweep(
        self,
        output: Optional[Path] = None,
        workers: Optional[int] = None,
        timestamp: Optional[str] = None,
    ) -> SweepResult:
        spec = self.sweep_spec()
        if output is None:
            filename = timestamped_filename(f"sweep_{spec.task}_{{timestamp}}.csv", timestamp)
            output = self.config.paths.sweeps_dir / filename
        runner = SweepRunner(spec, workers or self.config.sweep.workers)
        result = runner.run(Path(output))
        self.logger.info("Sweep with %s rows saved to %s", len(result.frame), result.csv_path)
        return result

    def run_route(
        self,
        omegas: Optional[List[float]] = None,
        level: Optional[str] = None,
        output_dir: Optional[Path] = None,
    ) -> Dict[str, Any]:
        route = self.config.route
        settings = RouteSettings(
            transient=route.transient,
            iterations=route.iterations,
            curve_points=route.curve_points,
            ode_curve_points=route.ode_curve_points,
            circle_modes=self.config.section.circle_modes,
            onset_rel_tol=route.onset_rel_tol,
            seed=self.config.section.seed,
        )
        level = level or route.level
        omegas = list(omegas or route.omegas)
        system = self.config.system
        output_dir = Path(output_dir or self.config.paths.routes_dir)
        manifest = RunManifest.start(
            {
                "level": level,
                "nu": system.nu,
                "mu": system.mu,
                "omegas": omegas,
                "settings": asdict(settings),
                "model": self.config.to_model().to_mapping(),
                "system": self.config.to_params().to_mapping(),
                "integrator": self.config.integrator.dict(),
            }
        )
        report: RouteReport = route_report(
            system.nu,
            system.mu,
            omegas,
            output_dir,
            level=level,
            settings=settings,
            model=self.config.to_model(),
            params=self.config.to_params(),
            cfg=self.config.integrator.to_config(),
        )
        manifest_path = manifest.finish(report.files).write(output_dir / f"route_{level}_manifest.json")
        return {"report": report, "manifest": manifest_path}

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from ..exceptions import NotMonotone, VerificationFailed
from ..model.bounds import omega0 as threshold_omega0
from ..model.return_map import (
    AnnulusPoint,
    ReturnMapModel,
    jacobian_grid,
    preimage_phase,
    return_map,
    return_map_grid,
)
from ..system.params import TWO_PI
from .domain import Domain, build_domain
from .strips import LIPSCHITZ_SAFETY, STRIP_SAMPLES, StripSpec, sampled_lipschitz, strips_frame

logger = logging.getLogger("forced_heteroclinic.horseshoe.conley_moser")

CONDITIONS = ("P1", "P2", "P3")


@dataclass
class ConleyMoserReport:
    model: ReturnMapModel
    domain: Domain
    omega0: float
    p1_ok: bool
    p2_ok: bool
    p3_ok: bool
    lambda_h: float
    lambda_v: float
    mu_h: float
    mu_v: float
    contraction_sup: float
    expansion_min: float
    crossings: Tuple[int, ...]
    translations: Tuple[int, ...]
    winding_bounds: Tuple[Tuple[int, int], ...]
    vertical_strips: List[StripSpec]
    horizontal_strips: List[StripSpec]
    witnesses: Dict[str, Any] = field(default_factory=dict)
    grid: Tuple[int, int, int] = (0, 0, 0)
    refinement_stable: Optional[bool] = None

    @property
    def omega(self) -> float:
        return self.model.omega

    @property
    def symbol_count(self) -> int:
        return len(self.domain.strips)

    @property
    def flags(self) -> Tuple[bool, bool, bool]:
        return self.p1_ok, self.p2_ok, self.p3_ok

    @property
    def passed(self) -> bool:
        return all(self.flags) and self.refinement_stable is not False

    @property
    def first_failure(self) -> Optional[str]:
        for name, ok in zip(CONDITIONS, self.flags):
            if not ok:
                return name
        if self.refinement_stable is False:
            return "refinement"
        return None

    def summary(self) -> Dict[str, Any]:
        return {
            "omega": self.omega,
            "omega0": self.omega0,
            "window": [self.domain.phi_l, self.domain.phi_r],
            "r_range": [self.domain.r_lo, self.domain.r_hi],
            "strips": [list(s) for s in self.domain.strips],
            "P1_ok": self.p1_ok,
            "P2_ok": self.p2_ok,
            "P3_ok": self.p3_ok,
            "lambda_h": self.lambda_h,
            "lambda_v": self.lambda_v,
            "mu_h": self.mu_h,
            "mu_v": self.mu_v,
            "contraction_sup": self.contraction_sup,
            "expansion_min": self.expansion_min,
            "crossings": list(self.crossings),
            "translations": list(self.translations),
            "winding_bounds": [list(pair) for pair in self.winding_bounds],
            "grid": list(self.grid),
            "refinement_stable": self.refinement_stable,
            "passed": self.passed,
            "first_failure": self.first_failure,
            "witnesses": {key: _jsonable(value) for key, value in self.witnesses.items()},
        }

    def strips_frame(self) -> pd.DataFrame:
        return strips_frame(self.vertical_strips + self.horizontal_strips)

    def raise_for_failure(self) -> None:
        condition = self.first_failure
        if condition is not None:
            raise VerificationFailed(
                f"Conley-Moser condition {condition} failed at omega={self.omega:.6g}",
                condition=condition,
                witness=self.witnesses.get(condition),
            )


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _stretch(
    model: ReturnMapModel, domain: Domain, strip: Tuple[float, float], r_grid: np.ndarray
) -> Tuple[int, Tuple[int, int], Dict[str, Any]]:
    """Full crossings of D guaranteed for every segment [a, b] × {r} of the strip.

    The lifted image of a segment is [R₁(a, r), R₁(b, r)]; it crosses some
    translate D + 2πk fully whenever its length exceeds 2π + width. Also
    returns the range of k any image point can need.
    """

    a, b = strip
    lo, _ = return_map_grid(model, np.full_like(r_grid, a), r_grid)
    hi, _ = return_map_grid(model, np.full_like(r_grid, b), r_grid)
    spans = hi - lo
    h = float(r_grid[1] - r_grid[0]) if len(r_grid) > 1 else 0.0
    margin = LIPSCHITZ_SAFETY * sampled_lipschitz(r_grid, spans) * h / 2.0
    worst = int(np.argmin(spans))
    guaranteed = float(spans[worst]) - margin - domain.width
    count = max(0, math.floor(guaranteed / TWO_PI))
    bounds = (
        math.floor((float(np.min(lo)) - domain.phi_r) / TWO_PI),
        math.ceil((float(np.max(hi)) - domain.phi_l) / TWO_PI),
    )
    witness = {
        "strip": [a, b],
        "r": float(r_grid[worst]),
        "span": float(spans[worst]),
        "margin": margin,
        "required": TWO_PI + domain.width,
    }
    return count, bounds, witness


def _reference_translation(
    model: ReturnMapModel, domain: Domain, strip: Tuple[float, float]
) -> Tuple[int, float, float]:
    """A translate k crossed by the middle segment, and the radii [r_start, r_stop] whose segments cross D + 2πk.

    Both R₁(a, r) and R₁(b, r) decrease in r, so these radii form an interval.
    """

    a, b = strip
    middle = domain.r_lo + 0.5 * domain.height
    k = math.ceil((return_map(model, AnnulusPoint(a, middle)).phi - domain.phi_l) / TWO_PI)
    nudge = 1e-9 * domain.height

    def left(r: float) -> float:
        return return_map(model, AnnulusPoint(a, r)).phi - (domain.phi_l + TWO_PI * k)

    def right(r: float) -> float:
        return return_map(model, AnnulusPoint(b, r)).phi - (domain.phi_r + TWO_PI * k)

    # at the solved radius the edge image sits on the target; step inside so a preimage stays bracketed
    r_start = domain.r_lo if left(domain.r_lo) <= 0.0 else brentq(left, domain.r_lo, middle, xtol=1e-15) + nudge
    r_stop = domain.r_hi if right(domain.r_hi) >= 0.0 else brentq(right, middle, domain.r_hi, xtol=1e-15) - nudge
    return k, r_start, r_stop


def _horizontal_strip(
    model: ReturnMapModel,
    domain: Domain,
    strip: Tuple[float, float],
    k: int,
    radii: Tuple[float, float],
    samples: int,
    label: str,
) -> Tuple[Optional[StripSpec], Dict[str, Any]]:
    """R(V) ∩ (D + 2πk) shifted back, as graphs over φ bounded by the images of the two segments at *radii*."""

    targets = np.linspace(domain.phi_l, domain.phi_r, samples)
    edges = []
    for r_edge in radii:
        heights = np.empty(samples)
        for i, target in enumerate(targets):
            phi = preimage_phase(model, float(target) + TWO_PI * k, r_edge, strip)
            if phi is None:
                return None, {"strip": list(strip), "target": float(target), "edge": r_edge, "k": k}
            _, r2 = return_map_grid(model, np.array([phi]), np.array([r_edge]))
            heights[i] = r2[0]
        edges.append(heights)
    spec = StripSpec.from_samples("horizontal", targets, edges[0], edges[1], label)
    return spec, {}


def _derivative_bounds(model: ReturnMapModel, domain: Domain, n_phi: int, n_r: int) -> Dict[str, Any]:
    phi = np.linspace(domain.phi_l, domain.phi_r, n_phi)
    r = np.linspace(domain.r_lo, domain.r_hi, n_r)
    phi_mesh, r_mesh = np.meshgrid(phi, r, indexing="ij")
    jac = jacobian_grid(model, phi_mesh, r_mesh)
    h_phi = float(phi[1] - phi[0])
    h_r = float(r[1] - r[0])

    def margin(values: np.ndarray) -> float:
        l_phi = float(np.max(np.abs(np.diff(values, axis=0)))) / h_phi
        l_r = float(np.max(np.abs(np.diff(values, axis=1)))) / h_r
        return LIPSCHITZ_SAFETY * (l_phi * h_phi + l_r * h_r) / 2.0

    contraction = jac["r2_r"]
    expansion = jac["r1_phi"]
    i_sup = np.unravel_index(int(np.argmax(contraction)), contraction.shape)
    i_inf = np.unravel_index(int(np.argmin(expansion)), expansion.shape)
    expansion_safe = float(expansion[i_inf]) - margin(expansion)
    return {
        "contraction_sup": float(contraction[i_sup]),
        "lambda_h": float(contraction[i_sup]) + margin(contraction),
        "sup_at": (float(phi_mesh[i_sup]), float(r_mesh[i_sup])),
        "expansion_min": float(expansion[i_inf]),
        "lambda_v": 1.0 / expansion_safe if expansion_safe > 0.0 else math.inf,
        "inf_at": (float(phi_mesh[i_inf]), float(r_mesh[i_inf])),
    }


def _evaluate(
    model: ReturnMapModel, domain: Domain, n_phi: int, n_r: int, strip_samples: int, omega0: float
) -> ConleyMoserReport:
    r_grid = np.linspace(domain.r_lo, domain.r_hi, n_r)
    witnesses: Dict[str, Any] = {}
    p1_ok = True
    crossings: List[int] = []
    translations: List[int] = []
    winding_bounds: List[Tuple[int, int]] = []
    vertical: List[StripSpec] = []
    horizontal: List[StripSpec] = []

    strip_r = np.linspace(domain.r_lo, domain.r_hi, strip_samples)
    for index, strip in enumerate(domain.strips, start=1):
        vertical.append(
            StripSpec("vertical", strip_r, np.full(strip_samples, strip[0]), np.full(strip_samples, strip[1]), 0.0, f"V{index}")
        )
        count, bounds, witness = _stretch(model, domain, strip, r_grid)
        crossings.append(count)
        winding_bounds.append(bounds)
        if count == 0:
            translations.append(bounds[0])
            if p1_ok:
                witnesses["P1"] = witness
            p1_ok = False
            continue
        k, r_start, r_stop = _reference_translation(model, domain, strip)
        translations.append(k)
        spec, failure = _horizontal_strip(model, domain, strip, k, (r_start, r_stop), strip_samples, f"H{index}")
        if spec is None or not spec.ordered:
            if p1_ok:
                witnesses["P1"] = failure or {"strip": list(strip), "reason": "boundary graphs cross"}
            p1_ok = False
            continue
        if spec.upper.max() > domain.r_hi + 1e-12 or spec.lower.min() < domain.r_lo - 1e-12:
            if p1_ok:
                witnesses["P1"] = {"strip": list(strip), "reason": "image leaves [1, 1+eps_v]"}
            p1_ok = False
        horizontal.append(spec)

    for i in range(len(horizontal)):
        for j in range(i + 1, len(horizontal)):
            overlap = np.minimum(horizontal[i].upper, horizontal[j].upper) - np.maximum(
                horizontal[i].lower, horizontal[j].lower
            )
            if np.any(overlap >= 0.0) and p1_ok:
                worst = int(np.argmax(overlap))
                witnesses["P1"] = {
                    "reason": f"{horizontal[i].label} and {horizontal[j].label} intersect",
                    "phi": float(horizontal[i].abscissa[worst]),
                }
                p1_ok = False

    mu_v = max((strip.lipschitz for strip in vertical), default=0.0)
    mu_h = max((strip.lipschitz for strip in horizontal), default=math.inf)
    if p1_ok and not mu_v * mu_h < 1.0:
        witnesses["P1"] = {"reason": "mu_v * mu_h >= 1", "mu_v": mu_v, "mu_h": mu_h}
        p1_ok = False

    bounds = _derivative_bounds(model, domain, n_phi, n_r)
    p2_ok = bounds["lambda_h"] < 1.0
    p3_ok = bounds["lambda_v"] < 1.0
    if not p2_ok:
        witnesses["P2"] = {"point": bounds["sup_at"], "lambda_h": bounds["lambda_h"]}
    if not p3_ok:
        witnesses["P3"] = {"point": bounds["inf_at"], "expansion_min": bounds["expansion_min"]}

    return ConleyMoserReport(
        model=model,
        domain=domain,
        omega0=omega0,
        p1_ok=p1_ok,
        p2_ok=p2_ok,
        p3_ok=p3_ok,
        lambda_h=bounds["lambda_h"],
        lambda_v=bounds["lambda_v"],
        mu_h=mu_h,
        mu_v=mu_v,
        contraction_sup=bounds["contraction_sup"],
        expansion_min=bounds["expansion_min"],
        crossings=tuple(crossings),
        translations=tuple(translations),
        winding_bounds=tuple(winding_bounds),
        vertical_strips=vertical,
        horizontal_strips=horizontal,
        witnesses=witnesses,
        grid=(n_phi, n_r, strip_samples),
    )


def verify_conley_moser(
    model: ReturnMapModel,
    domain: Optional[Domain] = None,
    omega: Optional[float] = None,
    n_phi: int = 128,
    n_r: int = 64,
    strip_samples: int = STRIP_SAMPLES,
    refine: bool = True,
    strict: bool = True,
) -> ConleyMoserReport:
    """Check the horseshoe conditions for R on D.

    P1: the image of every segment [a_i, b_i] × {r} crosses a translate of D
    fully, the horizontal strips are disjoint and μ_v μ_h < 1. P2: λ_h = sup ∂R₂/∂r < 1. P3: λ_v = 1/inf ∂R₁/∂φ < 1.
    With *refine* all grids are doubled and every verdict must be unchanged.
    """

    if omega is not None:
        model = model.with_omega(omega)
    if domain is None:
        domain = build_domain(model)
    try:
        threshold = threshold_omega0(model, (domain.phi_l, domain.phi_r))
    except NotMonotone as exc:
        logger.warning("No omega0 on the domain window: %s", exc)
        threshold = math.nan
    if model.omega < threshold:
        logger.warning("omega=%.6g is below omega0=%.6g; P1 is not expected to hold", model.omega, threshold)

    report = _evaluate(model, domain, n_phi, n_r, strip_samples, threshold)
    if refine:
        finer = _evaluate(model, domain, 2 * n_phi, 2 * n_r, 2 * strip_samples, threshold)
        report.refinement_stable = finer.flags == report.flags
        if not report.refinement_stable:
            logger.warning("Verdicts changed under grid refinement: %s -> %s", report.flags, finer.flags)

    logger.info(
        "Conley-Moser at omega=%.6g (omega0=%.6g): P1=%s P2=%s P3=%s lambda_h=%.4g lambda_v=%.4g crossings=%s",
        model.omega,
        threshold,
        report.p1_ok,
        report.p2_ok,
        report.p3_ok,
        report.lambda_h,
        report.lambda_v,
        report.crossings,
    )
    if strict:
        report.raise_for_failure()
    return report

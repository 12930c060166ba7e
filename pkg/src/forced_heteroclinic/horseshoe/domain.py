from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Tuple

from scipy.optimize import brentq

from ..exceptions import NoWindow
from ..model.return_map import ReturnMapModel

logger = logging.getLogger("forced_heteroclinic.horseshoe.domain")

Interval = Tuple[float, float]

# ε_v + ξ_L must stay strictly below ε_w; the window starts once ξ < 0.99 (ε_w − ε_v)
BLOCK_FILL = 0.99


@dataclass(frozen=True)
class Domain:
    """D = [φ_L, φ_R] × [1, 1+ε_v] together with the strip windows I₁, I₂."""

    window: Interval
    phi_l: float
    phi_r: float
    r_lo: float
    r_hi: float
    strips: Tuple[Interval, ...]

    @property
    def width(self) -> float:
        return self.phi_r - self.phi_l

    @property
    def height(self) -> float:
        return self.r_hi - self.r_lo

    def contains(self, phi: float, r: float, tol: float = 1e-12) -> bool:
        return (
            self.phi_l - tol <= phi <= self.phi_r + tol
            and self.r_lo - tol <= r <= self.r_hi + tol
        )

    def strip_of(self, phi: float, tol: float = 1e-12) -> int:
        """1-based index of the strip window holding *phi*, 0 if none."""

        for index, (lo, hi) in enumerate(self.strips, start=1):
            if lo - tol <= phi <= hi + tol:
                return index
        return 0


def build_domain(model: ReturnMapModel, margin: float = 0.1, strip_count: int = 2) -> Domain:
    """Rectangle D inside a decreasing window of ξ, with strips at its outer parts.

    *margin* is the fraction of the window trimmed at each critical point. The
    left edge is pushed further right until ε_v + ξ_L < ε_w holds.
    """

    if not 0.0 <= margin < 0.5:
        raise ValueError(f"margin must lie in [0, 0.5), got {margin}")
    if strip_count < 1:
        raise ValueError("strip_count must be at least 1")

    phi_1, phi_2 = model.xi.decreasing_window()
    pad = margin * (phi_2 - phi_1)
    phi_l, phi_r = phi_1 + pad, phi_2 - pad

    ceiling = BLOCK_FILL * (model.eps_w - model.eps_v)
    if float(model.xi.value(phi_r)) >= ceiling:
        raise NoWindow(
            f"xi stays above eps_w - eps_v = {model.eps_w - model.eps_v:.6g} on the whole decreasing window"
        )
    if float(model.xi.value(phi_l)) >= ceiling:
        phi_l = brentq(lambda phi: float(model.xi.value(phi)) - ceiling, phi_l, phi_r, xtol=1e-14)
        logger.info("Window start moved to phi_L=%.6g so that eps_v + xi_L < eps_w", phi_l)

    # strips are the first and last pieces of a (2m-1)-way split
    pieces = 2 * strip_count - 1
    step = (phi_r - phi_l) / pieces
    strips = tuple((phi_l + 2 * i * step, phi_l + (2 * i + 1) * step) for i in range(strip_count))
    strips = strips[:-1] + ((strips[-1][0], phi_r),)

    domain = Domain((phi_1, phi_2), phi_l, phi_r, 1.0, 1.0 + model.eps_v, strips)
    logger.debug("Domain phi in [%.6g, %.6g], strips %s", phi_l, phi_r, strips)
    return domain

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import NotFound, VerificationFailed
from ..model.return_map import AnnulusPoint, ReturnMapModel, preimage_phase, return_map
from ..system.params import TWO_PI
from .conley_moser import ConleyMoserReport

logger = logging.getLogger("forced_heteroclinic.horseshoe.itinerary")

MAX_SWEEPS = 200
SWEEP_TOL = 1e-15
STEP_TOL = 1e-9


@dataclass(frozen=True)
class ItineraryResult:
    word: str
    shadow: AnnulusPoint
    orbit: np.ndarray
    translations: Tuple[int, ...]
    max_residual: float

    def symbols(self) -> List[int]:
        return [int(c) for c in self.word]

    @property
    def windings(self) -> Dict[str, Tuple[int, int]]:
        """Smallest and largest translate used by each symbol of the word."""

        seen: Dict[str, List[int]] = {}
        for symbol, k in zip(self.word, self.translations):
            seen.setdefault(symbol, []).append(k)
        return {symbol: (min(ks), max(ks)) for symbol, ks in sorted(seen.items())}


def _parse_word(word: Union[str, Sequence[int]], symbol_count: int) -> str:
    text = "".join(str(s) for s in word)
    if not text:
        raise ValueError("Itinerary word must not be empty.")
    allowed = {str(i) for i in range(1, symbol_count + 1)}
    if not set(text) <= allowed:
        raise ValueError(f"Word {text!r} uses symbols outside {sorted(allowed)}")
    return text


def _translate(
    model: ReturnMapModel, strip: Tuple[float, float], r: float, target: float, current: Optional[int]
) -> int:
    """k with target + 2πk in the lifted image of [a, b] × {r}; *current* is kept while it still fits."""

    lo = return_map(model, AnnulusPoint(strip[0], r)).phi
    hi = return_map(model, AnnulusPoint(strip[1], r)).phi
    if current is not None and lo <= target + TWO_PI * current <= hi:
        return current
    return math.ceil((lo - target) / TWO_PI)


def itinerary_shadow(
    report: ConleyMoserReport,
    word: Union[str, Sequence[int]],
    r0: Optional[float] = None,
) -> ItineraryResult:
    """Orbit segment x_0, …, x_{n-1} with x_j ∈ V_{s_j} and R(x_j) = x_{j+1} + (2πk_j, 0).

    Angles are pinned at the end of the word and radii at the start; the mixed
    boundary value problem is solved by repeated sweeps, each contracting
    because R expands φ and contracts r. The translate k_j is whichever one the
    image of the segment through x_j crosses at the target angle.
    """

    if not report.passed:
        raise VerificationFailed(
            "Itineraries need a verified horseshoe", condition=report.first_failure or "P1"
        )
    model, domain = report.model, report.domain
    text = _parse_word(word, report.symbol_count)
    n = len(text)
    strips = [domain.strips[int(c) - 1] for c in text]
    ks: List[Optional[int]] = [None] * n

    phi = np.array([0.5 * (lo + hi) for lo, hi in strips])
    r = np.full(n, domain.r_lo + 0.5 * domain.height if r0 is None else float(r0))
    for _ in range(MAX_SWEEPS):
        change = 0.0
        for j in range(n - 1):
            ks[j] = _translate(model, strips[j], r[j], phi[j + 1], ks[j])
            solved = preimage_phase(model, phi[j + 1] + TWO_PI * ks[j], r[j], strips[j])
            if solved is None:
                raise NotFound(f"Strip {text[j]} does not reach the target at step {j}", word=text)
            change = max(change, abs(solved - phi[j]))
            phi[j] = solved
            image = return_map(model, AnnulusPoint(phi[j], r[j]))
            change = max(change, abs(image.r - r[j + 1]))
            r[j + 1] = image.r
        if change <= SWEEP_TOL * (1.0 + float(np.max(np.abs(phi)))):
            break

    translations = tuple(int(k) for k in ks[:-1])

    orbit = np.column_stack([phi, r])
    residual = 0.0
    for j in range(n):
        vertical = report.vertical_strips[int(text[j]) - 1]
        if not (domain.contains(phi[j], r[j], STEP_TOL) and vertical.contains(r[j], phi[j], STEP_TOL)):
            raise NotFound(f"Iterate {j} left V{text[j]}: ({phi[j]:.12g}, {r[j]:.12g})", word=text)
        if j < n - 1:
            image = return_map(model, AnnulusPoint(phi[j], r[j]))
            step = max(abs(image.phi - TWO_PI * translations[j] - phi[j + 1]), abs(image.r - r[j + 1]))
            residual = max(residual, step)
    if residual > STEP_TOL:
        raise NotFound(f"Shadow orbit residual {residual:.3e} exceeds {STEP_TOL:g}", word=text)

    return ItineraryResult(text, AnnulusPoint(float(phi[0]), float(r[0])), orbit, translations, residual)


def all_words(length: int, symbol_count: int = 2) -> List[str]:
    symbols = [str(i) for i in range(1, symbol_count + 1)]
    return ["".join(w) for w in itertools.product(symbols, repeat=length)]


def realize_all_words(report: ConleyMoserReport, length: int = 10) -> List[ItineraryResult]:
    """Shadow every word of *length*; raises NotFound on the first unrealised word."""

    results = [itinerary_shadow(report, word) for word in all_words(length, report.symbol_count)]
    logger.info("Realised all %s words of length %s", len(results), length)
    return results


def entropy_lower_bound(report: Union[ConleyMoserReport, int]) -> float:
    """log m for a verified horseshoe with m strips."""

    if isinstance(report, int):
        if report < 1:
            raise ValueError("A horseshoe needs at least one strip.")
        return math.log(report)
    if not report.passed:
        raise VerificationFailed("Entropy bound needs a verified horseshoe", condition=report.first_failure or "P1")
    return math.log(report.symbol_count)


def count_crossings(report: ConleyMoserReport) -> int:
    """Total number of full crossings of D by the images R(V_i)."""

    return int(sum(report.crossings))


def measured_entropy(report: ConleyMoserReport) -> float:
    """log of the total crossing count, the growth rate of admissible words when every crossing is a symbol."""

    total = count_crossings(report)
    return math.log(total) if total > 0 else 0.0


def observed_windings(results: Sequence[ItineraryResult]) -> Dict[str, List[int]]:
    """Per symbol, the smallest and largest translate used across shadowed words."""

    merged: Dict[str, List[int]] = {}
    for result in results:
        for symbol, (k_lo, k_hi) in result.windings.items():
            bounds = merged.setdefault(symbol, [k_lo, k_hi])
            bounds[0] = min(bounds[0], k_lo)
            bounds[1] = max(bounds[1], k_hi)
    return dict(sorted(merged.items()))

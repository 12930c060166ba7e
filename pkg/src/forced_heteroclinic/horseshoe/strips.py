from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List

import numpy as np
import pandas as pd

STRIP_SAMPLES = 512
LIPSCHITZ_SAFETY = 2.0


def sampled_lipschitz(abscissa: np.ndarray, values: np.ndarray) -> float:
    """Largest divided difference of *values* over consecutive samples."""

    if len(abscissa) < 2:
        return 0.0
    return float(np.max(np.abs(np.diff(values) / np.diff(abscissa))))


@dataclass(frozen=True)
class StripSpec:
    """A strip between two sampled Lipschitz graphs.

    Vertical strips are graphs φ = u(r) over r, horizontal strips are graphs
    r = u(φ) over φ.
    """

    kind: str
    abscissa: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    lipschitz: float
    label: str = ""

    def __post_init__(self) -> None:
        if self.kind not in {"vertical", "horizontal"}:
            raise ValueError(f"Unknown strip kind: {self.kind}. Allowed: vertical, horizontal")
        if not (len(self.abscissa) == len(self.lower) == len(self.upper)):
            raise ValueError("Strip boundaries must be sampled on the same abscissa.")

    @property
    def width(self) -> float:
        return float(np.max(self.upper - self.lower))

    @property
    def ordered(self) -> bool:
        return bool(np.all(self.lower < self.upper))

    def sampled_lipschitz(self) -> float:
        return max(
            sampled_lipschitz(self.abscissa, self.lower),
            sampled_lipschitz(self.abscissa, self.upper),
        )

    def contains(self, coordinate: float, height: float, tol: float = 0.0) -> bool:
        """Membership for a point given as (abscissa, graph value)."""

        if not self.abscissa[0] - tol <= coordinate <= self.abscissa[-1] + tol:
            return False
        lo = float(np.interp(coordinate, self.abscissa, self.lower))
        hi = float(np.interp(coordinate, self.abscissa, self.upper))
        return lo - tol <= height <= hi + tol

    @classmethod
    def from_samples(
        cls, kind: str, abscissa: np.ndarray, lower: np.ndarray, upper: np.ndarray, label: str = ""
    ) -> "StripSpec":
        bound = LIPSCHITZ_SAFETY * max(sampled_lipschitz(abscissa, lower), sampled_lipschitz(abscissa, upper))
        return cls(kind, np.asarray(abscissa), np.asarray(lower), np.asarray(upper), bound, label)

    def to_records(self) -> List[Dict[str, float]]:
        return [
            {"strip": self.label, "kind": self.kind, "s": float(s), "lower": float(lo), "upper": float(hi)}
            for s, lo, hi in zip(self.abscissa, self.lower, self.upper)
        ]


def strips_frame(strips: List[StripSpec]) -> pd.DataFrame:
    """Long-format table of strip boundaries for CSV output."""

    rows: List[Dict[str, float]] = []
    for strip in strips:
        rows.extend(strip.to_records())
    return pd.DataFrame(rows, columns=["strip", "kind", "s", "lower", "upper"])

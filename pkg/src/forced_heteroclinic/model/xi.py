from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from ..exceptions import NoWindow

ArrayLike = Union[float, np.ndarray]

SCAN_POINTS = 10_000


@dataclass(frozen=True)
class XiProfile:
    """ξ(φ) = ν·(1 + (μ/(1+μ))·g(φ)) with g a trigonometric polynomial, max|g| ≤ 1.

    ξ is the trace of W^u(P_v) on In(P_w). The default g(φ) = cos φ gives one
    maximum at φ = 0 and one minimum at φ = π.
    """

    nu: float
    mu: float
    cos_coefficients: Tuple[float, ...] = (1.0,)
    sin_coefficients: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.nu < 0.0 or self.mu < 0.0:
            raise ValueError(f"xi profile needs nu, mu >= 0, got nu={self.nu}, mu={self.mu}")
        object.__setattr__(self, "cos_coefficients", tuple(float(c) for c in self.cos_coefficients))
        object.__setattr__(self, "sin_coefficients", tuple(float(c) for c in self.sin_coefficients))
        if not any(self.cos_coefficients) and not any(self.sin_coefficients):
            raise ValueError("xi shape must be non-constant.")
        grid = np.linspace(0.0, 2.0 * math.pi, SCAN_POINTS, endpoint=False)
        if np.max(np.abs(self._shape(grid))) > 1.0 + 1e-12:
            raise ValueError("xi shape must satisfy max|g| <= 1 so that xi stays positive.")

    @property
    def amplitude(self) -> float:
        return self.mu / (1.0 + self.mu)

    def _shape(self, phi: ArrayLike) -> ArrayLike:
        total = np.zeros_like(np.asarray(phi, dtype=float))
        for k, a in enumerate(self.cos_coefficients, start=1):
            total = total + a * np.cos(k * phi)
        for k, b in enumerate(self.sin_coefficients, start=1):
            total = total + b * np.sin(k * phi)
        return total

    def _shape_derivative(self, phi: ArrayLike) -> ArrayLike:
        total = np.zeros_like(np.asarray(phi, dtype=float))
        for k, a in enumerate(self.cos_coefficients, start=1):
            total = total - k * a * np.sin(k * phi)
        for k, b in enumerate(self.sin_coefficients, start=1):
            total = total + k * b * np.cos(k * phi)
        return total

    def value(self, phi: ArrayLike) -> ArrayLike:
        return self.nu * (1.0 + self.amplitude * self._shape(phi))

    def derivative(self, phi: ArrayLike) -> ArrayLike:
        return self.nu * self.amplitude * self._shape_derivative(phi)

    def scalar(self, phi: float) -> Tuple[float, float]:
        """(ξ, ξ') at a single angle using math instead of numpy."""

        shape = 0.0
        slope = 0.0
        for k, a in enumerate(self.cos_coefficients, start=1):
            shape += a * math.cos(k * phi)
            slope -= k * a * math.sin(k * phi)
        for k, b in enumerate(self.sin_coefficients, start=1):
            shape += b * math.sin(k * phi)
            slope += k * b * math.cos(k * phi)
        scale = self.nu * self.amplitude
        return self.nu + scale * shape, scale * slope

    def max_value(self) -> float:
        grid = np.linspace(0.0, 2.0 * math.pi, SCAN_POINTS, endpoint=False)
        return float(np.max(self.value(grid)))

    def min_value(self) -> float:
        grid = np.linspace(0.0, 2.0 * math.pi, SCAN_POINTS, endpoint=False)
        return float(np.min(self.value(grid)))

    def critical_points(self) -> List[Tuple[float, str]]:
        """Critical points in [0, 2π) as (φ, 'max' | 'min'), refined by brentq."""

        grid = np.linspace(0.0, 2.0 * math.pi, SCAN_POINTS + 1)
        slope = self._shape_derivative(grid)
        points: List[Tuple[float, str]] = []
        for i in range(SCAN_POINTS):
            left, right = slope[i], slope[i + 1]
            if left == 0.0:
                phi = float(grid[i])
            elif left * right < 0.0:
                phi = brentq(self._shape_derivative, grid[i], grid[i + 1], xtol=1e-14)
            else:
                continue
            kind = "max" if left > 0.0 or (left == 0.0 and right < 0.0) else "min"
            if phi < 2.0 * math.pi - 1e-12 and all(abs(phi - q) > 1e-9 for q, _ in points):
                points.append((float(phi), kind))
        return points

    def decreasing_window(self) -> Tuple[float, float]:
        """[φ1, φ2] from a local maximum to the next local minimum (lifted, φ2 > φ1)."""

        if self.nu == 0.0 or self.mu == 0.0:
            raise NoWindow("xi is constant (nu = 0 or mu = 0); no decreasing window exists.")
        critical = sorted(self.critical_points())
        maxima = [phi for phi, kind in critical if kind == "max"]
        if not maxima:
            raise NoWindow("xi has no local maximum; profile is not Morse.")
        start = maxima[0]
        later = [phi for phi, kind in critical if kind == "min" and phi > start]
        if later:
            end = later[0]
        else:
            minima = [phi for phi, kind in critical if kind == "min"]
            if not minima:
                raise NoWindow("xi has no local minimum; profile is not Morse.")
            end = minima[0] + 2.0 * math.pi
        return start, end


def xi_eval(profile: XiProfile, phi: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """(ξ(φ), ξ'(φ))."""

    return profile.value(phi), profile.derivative(phi)


def is_decreasing(profile: XiProfile, window: Sequence[float], n: int = SCAN_POINTS) -> Tuple[bool, float]:
    """Scan *window* on *n* points; return (monotone, first witness φ of failure)."""

    grid = np.linspace(window[0], window[1], n)
    values = profile.value(grid)
    slopes = profile.derivative(grid)
    bad_values = np.nonzero(np.diff(values) >= 0.0)[0]
    bad_slopes = np.nonzero(slopes[1:-1] > 0.0)[0]
    if bad_values.size:
        return False, float(grid[bad_values[0]])
    if bad_slopes.size:
        return False, float(grid[bad_slopes[0] + 1])
    return True, float("nan")

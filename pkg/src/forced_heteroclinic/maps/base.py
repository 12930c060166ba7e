from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Tuple

import numpy as np


class SectionMap(ABC):
    """A return map on a cross-section, iterated by the diagnostics."""

    name: str = "map"
    dimension: int = 2

    @abstractmethod
    def step(self, x: np.ndarray) -> np.ndarray:
        """Image of *x* under one iterate."""

    @abstractmethod
    def jacobian(self, x: np.ndarray) -> np.ndarray:
        """Derivative of :meth:`step` at *x*."""

    def step_with_jacobian(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return self.step(x), self.jacobian(x)

    def orbit(self, x0: np.ndarray, n: int) -> np.ndarray:
        """Array of shape (n + 1, dimension) starting with *x0*."""

        points = np.empty((n + 1, self.dimension))
        points[0] = x0
        for i in range(n):
            points[i + 1] = self.step(points[i])
        return points

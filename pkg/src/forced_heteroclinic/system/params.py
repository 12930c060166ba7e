from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Mapping, Sequence, Tuple

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Reduce *theta* to [0, 2π)."""

    reduced = math.fmod(theta, TWO_PI)
    if reduced < 0.0:
        reduced += TWO_PI
    # fmod of a tiny negative number can round up to exactly 2π
    if reduced >= TWO_PI:
        reduced = 0.0
    return reduced


@dataclass(frozen=True)
class ForcingProfile:
    """Truncated Fourier series f(θ) = a0 + Σ_k a_k cos kθ + b_k sin kθ.

    The default is f(θ) = cos θ.
    """

    kind: str = "cosine"
    a0: float = 0.0
    cos_coefficients: Tuple[float, ...] = (1.0,)
    sin_coefficients: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in {"cosine", "fourier"}:
            raise ValueError(f"Unsupported forcing profile: {self.kind}. Allowed: cosine, fourier")
        object.__setattr__(self, "cos_coefficients", tuple(float(c) for c in self.cos_coefficients))
        object.__setattr__(self, "sin_coefficients", tuple(float(c) for c in self.sin_coefficients))
        if self.kind == "cosine" and (self.a0 != 0.0 or self.cos_coefficients != (1.0,) or self.sin_coefficients):
            raise ValueError("The 'cosine' profile has fixed coefficients; use kind='fourier' to customise.")
        if not any(self.cos_coefficients) and not any(self.sin_coefficients):
            raise ValueError("Forcing profile must be non-constant.")

    @classmethod
    def cosine(cls) -> "ForcingProfile":
        return cls()

    @classmethod
    def fourier(
        cls,
        a0: float = 0.0,
        cos_coefficients: Sequence[float] = (),
        sin_coefficients: Sequence[float] = (),
    ) -> "ForcingProfile":
        return cls("fourier", float(a0), tuple(cos_coefficients), tuple(sin_coefficients))

    def value(self, theta: float) -> float:
        total = self.a0
        for k, a in enumerate(self.cos_coefficients, start=1):
            total += a * math.cos(k * theta)
        for k, b in enumerate(self.sin_coefficients, start=1):
            total += b * math.sin(k * theta)
        return total

    def derivative(self, theta: float) -> float:
        total = 0.0
        for k, a in enumerate(self.cos_coefficients, start=1):
            total -= k * a * math.sin(k * theta)
        for k, b in enumerate(self.sin_coefficients, start=1):
            total += k * b * math.cos(k * theta)
        return total

    def to_mapping(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "a0": self.a0,
            "cos_coefficients": list(self.cos_coefficients),
            "sin_coefficients": list(self.sin_coefficients),
        }


@dataclass(frozen=True)
class SystemParams:
    """Parameters (α, β, ν, μ, ω, f) of the forced vector field."""

    alpha: float = 1.0
    beta: float = -0.1
    nu: float = 0.0
    mu: float = 0.0
    omega: float = 1.0
    forcing: ForcingProfile = field(default_factory=ForcingProfile.cosine)

    def __post_init__(self) -> None:
        if not (self.beta < 0.0 < self.alpha):
            raise ValueError(f"Require beta < 0 < alpha, got alpha={self.alpha}, beta={self.beta}")
        if abs(self.beta) >= self.alpha:
            raise ValueError(f"Require |beta| < alpha, got alpha={self.alpha}, beta={self.beta}")
        if self.mu < 0.0:
            raise ValueError(f"Forcing amplitude mu must be >= 0, got {self.mu}")
        if self.omega <= 0.0:
            raise ValueError(f"omega must be positive so that theta is a global section, got {self.omega}")

    @property
    def strobe_period(self) -> float:
        return math.pi / self.omega

    def with_(self, **changes: Any) -> "SystemParams":
        return replace(self, **changes)

    def to_mapping(self) -> Dict[str, Any]:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "nu": self.nu,
            "mu": self.mu,
            "omega": self.omega,
            "forcing": self.forcing.to_mapping(),
        }

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "SystemParams":
        values = dict(data)
        forcing = values.pop("forcing", None)
        if isinstance(forcing, Mapping):
            forcing_data = dict(forcing)
            kind = forcing_data.pop("kind", "cosine")
            values["forcing"] = (
                ForcingProfile.cosine() if kind == "cosine" else ForcingProfile.fourier(**forcing_data)
            )
        return cls(**{key: (float(v) if key != "forcing" else v) for key, v in values.items()})


@dataclass(frozen=True)
class State4:
    """A point (x1, x2, x3, θ) of ℝ³ × S¹; θ is kept in [0, 2π)."""

    x1: float
    x2: float
    x3: float
    theta: float = 0.0

    def __post_init__(self) -> None:
        for name in ("x1", "x2", "x3"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))

    @property
    def spatial(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3])

    @property
    def r2(self) -> float:
        return self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3, self.theta])

    def kappa(self) -> "State4":
        return State4(self.x1, -self.x2, self.x3, self.theta)

    def with_spatial(self, x: Sequence[float]) -> "State4":
        return State4(x[0], x[1], x[2], self.theta)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "State4":
        theta = values[3] if len(values) > 3 else 0.0
        return cls(values[0], values[1], values[2], theta)

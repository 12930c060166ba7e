from __future__ import annotations

from typing import Any, Optional, Sequence


class ForcedHeteroclinicError(Exception):
    """Base class for numerical failures raised by the laboratory."""


class NonConvergence(ForcedHeteroclinicError):
    def __init__(self, message: str, seeds: Optional[Sequence[Any]] = None) -> None:
        super().__init__(message)
        self.seeds = list(seeds) if seeds is not None else []


class NotASaddle(ForcedHeteroclinicError):
    def __init__(self, message: str, eigenvalues: Optional[Sequence[complex]] = None) -> None:
        super().__init__(message)
        self.eigenvalues = list(eigenvalues) if eigenvalues is not None else []


class StepUnderflow(ForcedHeteroclinicError):
    def __init__(self, message: str, time: float) -> None:
        super().__init__(message)
        self.time = time


class Divergence(ForcedHeteroclinicError):
    def __init__(self, message: str, time: float) -> None:
        super().__init__(message)
        self.time = time


class Escaped(ForcedHeteroclinicError):
    """An orbit left the region where the diagnostics make sense."""


class Undefined(ForcedHeteroclinicError):
    """A quantity (e.g. a rotation number) does not exist for this orbit."""


class FitFailed(ForcedHeteroclinicError):
    def __init__(self, message: str, residual: float = float("nan")) -> None:
        super().__init__(message)
        self.residual = residual


class OnStableManifold(ForcedHeteroclinicError):
    def __init__(self, message: str, point: Any = None) -> None:
        super().__init__(message)
        self.point = point


class BlockOverflow(ForcedHeteroclinicError):
    def __init__(self, message: str, point: Any = None) -> None:
        super().__init__(message)
        self.point = point


class NotMonotone(ForcedHeteroclinicError):
    def __init__(self, message: str, witness: Optional[float] = None) -> None:
        super().__init__(message)
        self.witness = witness


class NoWindow(ForcedHeteroclinicError):
    """The ξ profile has no decreasing window usable as a horseshoe domain."""


class VerificationFailed(ForcedHeteroclinicError):
    def __init__(self, message: str, condition: str, witness: Any = None) -> None:
        super().__init__(message)
        self.condition = condition
        self.witness = witness


class NotFound(ForcedHeteroclinicError):
    def __init__(self, message: str, word: str = "") -> None:
        super().__init__(message)
        self.word = word


class SchemaMismatch(ForcedHeteroclinicError, ValueError):
    def __init__(self, message: str, missing: Optional[Sequence[str]] = None) -> None:
        super().__init__(message)
        self.missing = list(missing) if missing is not None else []

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml
from pydantic import BaseModel, Field, validator

from .integration.integrator import IntegratorConfig
from .model.return_map import ReturnMapModel
from .model.xi import XiProfile
from .section.classify import ClassifierSettings
from .system.params import ForcingProfile, SystemParams


class PathsConfig(BaseModel):
    """Filesystem locations used by the experiments."""

    base_output_dir: Path = Field(default=Path("data"))
    sweeps_dir: Path = Field(default=Path("data/sweeps"))
    routes_dir: Path = Field(default=Path("data/routes"))
    reports_dir: Path = Field(default=Path("data/reports"))
    logs_dir: Path = Field(default=Path("logs"))

    def resolve(self, project_root: Path) -> "PathsConfig":
        """Return a copy with paths resolved relative to *project_root*."""

        resolved = {}
        for field_name, value in self.dict().items():
            path = Path(value)
            if not path.is_absolute():
                path = (project_root / path).resolve()
            path.mkdir(parents=True, exist_ok=True)
            resolved[field_name] = path
        return PathsConfig(**resolved)


class SystemConfig(BaseModel):
    alpha: float = Field(default=1.0, gt=0.0)
    beta: float = Field(default=-0.1, lt=0.0)
    nu: float = Field(default=0.05)
    mu: float = Field(default=0.5, ge=0.0)
    omega: float = Field(default=1.0, gt=0.0)
    forcing: str = Field(default="cosine")
    forcing_a0: float = Field(default=0.0)
    forcing_cos: List[float] = Field(default_factory=lambda: [1.0])
    forcing_sin: List[float] = Field(default_factory=list)

    @validator("beta")
    def validate_beta(cls, value: float, values: Dict[str, Any]) -> float:
        alpha = values.get("alpha")
        if alpha is not None and abs(value) >= alpha:
            raise ValueError(f"Require |beta| < alpha, got alpha={alpha}, beta={value}")
        return value

    @validator("forcing")
    def validate_forcing(cls, value: str) -> str:
        allowed = {"cosine", "fourier"}
        if value not in allowed:
            raise ValueError(f"Unsupported forcing profile: {value}. Allowed: {allowed}")
        return value

    def to_params(self) -> SystemParams:
        if self.forcing == "cosine":
            profile = ForcingProfile.cosine()
        else:
            profile = ForcingProfile.fourier(self.forcing_a0, self.forcing_cos, self.forcing_sin)
        return SystemParams(self.alpha, self.beta, self.nu, self.mu, self.omega, profile)

    @classmethod
    def from_params(cls, p: SystemParams) -> "SystemConfig":
        return cls(
            alpha=p.alpha,
            beta=p.beta,
            nu=p.nu,
            mu=p.mu,
            omega=p.omega,
            forcing=p.forcing.kind,
            forcing_a0=p.forcing.a0,
            forcing_cos=list(p.forcing.cos_coefficients),
            forcing_sin=list(p.forcing.sin_coefficients),
        )


class IntegratorSection(BaseModel):
    rel_tol: float = Field(default=1e-10, gt=0.0)
    abs_tol: float = Field(default=1e-12, gt=0.0)
    max_step: float = Field(default=1.0, gt=0.0)
    max_time: float = Field(default=1e6, gt=0.0)

    def to_config(self) -> IntegratorConfig:
        return IntegratorConfig(self.rel_tol, self.abs_tol, self.max_step, self.max_time)


class SectionConfig(BaseModel):
    theta_star: float = Field(default=0.0)
    transient: int = Field(default=1000, ge=0)
    iterations: int = Field(default=1000, ge=100)
    circle_modes: int = Field(default=32, ge=1)
    circle_tolerance: float = Field(default=1e-4, gt=0.0)
    chaos_floor: float = Field(default=1e-3, ge=0.0)
    period_tolerance: float = Field(default=1e-7, gt=0.0)
    max_period: int = Field(default=64, ge=1)
    seeds: int = Field(default=2, ge=1)
    seed: int = Field(default=0)

    def to_settings(self) -> ClassifierSettings:
        return ClassifierSettings(
            transient=self.transient,
            iterations=self.iterations,
            circle_modes=self.circle_modes,
            circle_tolerance=self.circle_tolerance,
            chaos_floor=self.chaos_floor,
            period_tolerance=self.period_tolerance,
            max_period=self.max_period,
        )


class ModelConfig(BaseModel):
    c_v: float = Field(default=1.1, gt=0.0)
    e_v: float = Field(default=0.9, gt=0.0)
    c_w: float = Field(default=1.1, gt=0.0)
    e_w: float = Field(default=0.9, gt=0.0)
    eps_v: float = Field(default=0.04, gt=0.0, lt=1.0)
    eps_w: float = Field(default=0.1, gt=0.0, lt=1.0)
    omega: float = Field(default=1.0, gt=0.0)
    xi_nu: float = Field(default=0.05, ge=0.0)
    xi_mu: float = Field(default=0.5, ge=0.0)
    xi_cos: List[float] = Field(default_factory=lambda: [1.0])
    xi_sin: List[float] = Field(default_factory=list)

    @validator("eps_w")
    def validate_eps(cls, value: float, values: Dict[str, Any]) -> float:
        eps_v = values.get("eps_v")
        if eps_v is not None and not eps_v < value:
            raise ValueError(f"Require eps_v < eps_w, got eps_v={eps_v}, eps_w={value}")
        return value

    def to_model(self) -> ReturnMapModel:
        xi = XiProfile(self.xi_nu, self.xi_mu, tuple(self.xi_cos), tuple(self.xi_sin))
        return ReturnMapModel(self.c_v, self.e_v, self.c_w, self.e_w, self.eps_v, self.eps_w, self.omega, xi)

    @classmethod
    def from_model(cls, model: ReturnMapModel) -> "ModelConfig":
        data = model.to_mapping()
        return cls(**{key: data[key] for key in ("c_v", "e_v", "c_w", "e_w", "eps_v", "eps_w", "omega", "xi_nu", "xi_mu", "xi_cos", "xi_sin")})


class HorseshoeConfig(BaseModel):
    omega: Optional[float] = Field(default=None, gt=0.0)
    margin: float = Field(default=0.1, ge=0.0, lt=0.5)
    strip_count: int = Field(default=2, ge=2)
    n_phi: int = Field(default=128, ge=8)
    n_r: int = Field(default=64, ge=4)
    strip_samples: int = Field(default=512, ge=16)
    refine: bool = Field(default=True)
    itinerary_length: int = Field(default=10, ge=1)


class SweepConfig(BaseModel):
    task: str = Field(default="classify")
    level: str = Field(default="ode")
    axes: Dict[str, Tuple[float, float, int]] = Field(default_factory=lambda: {"omega": (0.5, 5.0, 50)})
    seed: int = Field(default=0)
    seeds_per_point: int = Field(default=1, ge=1)
    workers: int = Field(default=1, ge=1)

    @validator("task")
    def validate_task(cls, value: str) -> str:
        allowed = {"classify", "lyapunov", "rotation", "horseshoe"}
        if value not in allowed:
            raise ValueError(f"Unsupported sweep task: {value}. Allowed: {allowed}")
        return value

    @validator("axes")
    def validate_axes(cls, value: Dict[str, Tuple[float, float, int]]) -> Dict[str, Tuple[float, float, int]]:
        if not value:
            raise ValueError("A sweep needs at least one axis.")
        for name, (lo, hi, count) in value.items():
            if name not in {"nu", "mu", "omega"}:
                raise ValueError(f"Unsupported axis: {name}")
            if count < 2:
                raise ValueError(f"Axis {name} needs a grid count >= 2")
            if not lo < hi:
                raise ValueError(f"Axis {name} has an empty range [{lo}, {hi}]")
        return value


class RouteConfig(BaseModel):
    level: str = Field(default="model")
    omegas: List[float] = Field(default_factory=lambda: [0.05, 0.1, 0.2, 0.4, 0.8, 1.6, 3.2])
    transient: int = Field(default=1000, ge=0)
    iterations: int = Field(default=1000, ge=2)
    curve_points: int = Field(default=512, ge=65)
    ode_curve_points: int = Field(default=128, ge=16)
    onset_rel_tol: float = Field(default=0.01, gt=0.0, lt=1.0)

    @validator("level")
    def validate_level(cls, value: str) -> str:
        if value not in {"model", "ode"}:
            raise ValueError(f"Unsupported route level: {value}. Allowed: model, ode")
        return value


class LoggingConfig(BaseModel):
    level: str = Field(default="INFO")
    fmt: str = Field(default="%(asctime)s [%(levelname)s] %(name)s - %(message)s")
    file: str = Field(default="logs/forced_heteroclinic.log")


class ProjectConfig(BaseModel):
    paths: PathsConfig = Field(default_factory=PathsConfig)
    system: SystemConfig = Field(default_factory=SystemConfig)
    integrator: IntegratorSection = Field(default_factory=IntegratorSection)
    section: SectionConfig = Field(default_factory=SectionConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    horseshoe: HorseshoeConfig = Field(default_factory=HorseshoeConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    route: RouteConfig = Field(default_factory=RouteConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    def resolved(self, project_root: Path) -> "ProjectConfig":
        resolved_paths = self.paths.resolve(project_root)

        logging_file = Path(self.logging.file)
        if not logging_file.is_absolute():
            logging_file = (project_root / logging_file).resolve()
        logging_file.parent.mkdir(parents=True, exist_ok=True)

        logging_config = self.logging.copy(update={"file": str(logging_file)})
        return self.copy(update={"paths": resolved_paths, "logging": logging_config})

    def to_params(self) -> SystemParams:
        return self.system.to_params()

    def to_model(self) -> ReturnMapModel:
        return self.model.to_model()


def load_config(config_path: Path, project_root: Optional[Path] = None) -> ProjectConfig:
    """Load the YAML *config_path* into a :class:`ProjectConfig`."""

    config_path = config_path.resolve()
    if project_root is None:
        project_root = config_path.parent.parent if config_path.is_absolute() else Path.cwd()

    if not config_path.exists():
        raise FileNotFoundError(f"Configuration file not found: {config_path}")

    with config_path.open("r", encoding="utf-8") as handle:
        data: Dict[str, Any] = yaml.safe_load(handle) or {}

    config = ProjectConfig(**data)
    return config.resolved(project_root)


def system_from_mapping(data: Dict[str, Any]) -> SystemParams:
    """SystemParams from a `system` section mapping."""

    return SystemConfig(**data).to_params()


def dump_system_config(path: Path, p: SystemParams, model: Optional[ReturnMapModel] = None) -> Path:
    """Write *p* (and *model*) as the `system` (and `model`) sections of a YAML file."""

    data: Dict[str, Any] = {"system": SystemConfig.from_params(p).dict()}
    if model is not None:
        data["model"] = ModelConfig.from_model(model).dict()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        yaml.safe_dump(data, handle, sort_keys=False, allow_unicode=True)
    return path

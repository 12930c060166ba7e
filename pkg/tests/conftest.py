"""Shared fixtures for the laboratory tests."""

import math

import numpy as np
import pytest
import yaml

from forced_heteroclinic.horseshoe.domain import build_domain
from forced_heteroclinic.integration.integrator import IntegratorConfig
from forced_heteroclinic.model.bounds import omega0
from forced_heteroclinic.model.return_map import ReturnMapModel
from forced_heteroclinic.model.xi import XiProfile
from forced_heteroclinic.system.params import SystemParams


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unforced():
    return SystemParams(alpha=1.0, beta=-0.1, nu=0.0, mu=0.0, omega=1.0)


@pytest.fixture
def forced():
    return SystemParams(alpha=1.0, beta=-0.1, nu=0.05, mu=0.5, omega=1.0)


@pytest.fixture
def fast_integrator():
    return IntegratorConfig(rel_tol=1e-9, abs_tol=1e-11)


@pytest.fixture
def flagship():
    """Rates 1.1/0.9, eps_v=0.04, eps_w=0.1, nu=0.05, mu=0.5."""
    return ReturnMapModel(1.1, 0.9, 1.1, 0.9, 0.04, 0.1, 1.0, XiProfile(0.05, 0.5))


@pytest.fixture
def flagship_domain(flagship):
    return build_domain(flagship)


@pytest.fixture
def flagship_omega0(flagship, flagship_domain):
    return omega0(flagship, (flagship_domain.phi_l, flagship_domain.phi_r))


@pytest.fixture
def horseshoe_model(flagship, flagship_omega0):
    return flagship.with_omega(float(math.ceil(flagship_omega0)))


@pytest.fixture
def config_file(tmp_path):
    """A project config under tmp_path/config with light-weight section settings."""

    data = {
        "paths": {
            "base_output_dir": "data",
            "sweeps_dir": "data/sweeps",
            "routes_dir": "data/routes",
            "reports_dir": "data/reports",
            "logs_dir": "logs",
        },
        "system": {"nu": 0.05, "mu": 0.5, "omega": 1.0},
        "section": {"transient": 50, "iterations": 200, "circle_modes": 8, "seeds": 2},
        "horseshoe": {"n_phi": 64, "n_r": 32, "strip_samples": 128, "itinerary_length": 4},
        "sweep": {"task": "lyapunov", "level": "model", "axes": {"omega": [0.05, 0.2, 3]}},
        "route": {"omegas": [0.05, 0.2, 0.8, 3.2], "transient": 50, "iterations": 200, "curve_points": 128},
        "logging": {"level": "WARNING", "file": "logs/test.log"},
    }
    path = tmp_path / "config" / "config.yaml"
    path.parent.mkdir(parents=True)
    with path.open("w", encoding="utf-8") as handle:
        yaml.safe_dump(data, handle)
    return path

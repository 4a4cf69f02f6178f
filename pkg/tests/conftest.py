import copy
import json
import math

import pytest

from fields.models import build_field
from fields.params import PhysicalParams
from harness.config import ExperimentConfig
from modes.dispersion import Dispersion
from propagator.grid import SpectralGrid
from safeguards.config_parser import parse_config

# Configuración de escritorio: b = t/4, grilla de 256 puntos (ξ_max = 8, dξ = 1/16),
# bump centrado en 0 de ancho 1/4 (7 modos) y una década de ajuste.
DESK_CONFIG = {
    "field": {"kind": "power_law", "gamma": 1, "coefficient": 0.25},
    "grid": {"half_width": [16 * math.pi], "points": [256]},
    "times": {"t_min": 1.0, "t_max": 100.0, "samples": 30},
    "tolerances": {"mode": 1e-10, "drift": 0.05},
    "initial": {"center": [0.0], "width": 0.25},
    "fit": {"decades": 1},
    "operator_norm": {"samples": 64, "window": [[-1.0, 1.0]], "refine": False},
    "audit": {"horizons": [50.0, 100.0]},
}

ZERO_FIELD = {"kind": "constant", "E0": [0.0]}


def merge(base: dict, overrides: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], value)
        else:
            out[key] = value
    return out


def desk_document(**overrides) -> dict:
    # el bloque field se reemplaza entero: cada kind tiene sus propias claves
    field = overrides.pop("field", None)
    doc = merge(DESK_CONFIG, overrides)
    if field is not None:
        doc["field"] = copy.deepcopy(field)
    return doc


def desk_config(**overrides) -> ExperimentConfig:
    return ExperimentConfig.from_run_config(parse_config(json.dumps(desk_document(**overrides))))


@pytest.fixture
def params():
    return PhysicalParams()


@pytest.fixture
def free_disp(params):
    return Dispersion(params, build_field("constant", params, E0=[0.0]))


@pytest.fixture
def linear_disp(params):
    """b(t) = t (campo constante E = 1)."""
    return Dispersion(params, build_field("power_law", params, gamma=1.0, coefficient=1.0))


@pytest.fixture
def slow_linear_disp(params):
    """b(t) = t/4: paso adiabático por ξ + b = 0."""
    return Dispersion(params, build_field("power_law", params, gamma=1.0, coefficient=0.25))


@pytest.fixture
def sqrt_disp(params):
    return Dispersion(params, build_field("power_law", params, gamma=0.5))


@pytest.fixture
def small_grid():
    return SpectralGrid((16 * math.pi,), (256,))

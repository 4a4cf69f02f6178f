# safeguards/config_parser.py
"""
Validación del documento de corrida (JSON). Todo valor numérico se valida
contra los invariantes de cada módulo antes de calcular nada.

Errores: JSON mal formado → ConfigParseError (2), clave desconocida →
UnknownKeyError (3), restricción violada → ConstraintError (4) con un
diagnóstico del tipo "params.m > 0".
"""
from __future__ import annotations

import json
from typing import Annotated, List, Literal, Optional, Tuple, Union

from pydantic import AfterValidator, BaseModel, ConfigDict, Field, ValidationError, model_validator

from core.errors import ConfigParseError, ConstraintError, UnknownKeyError

EXPERIMENTS = ("simulate", "stability", "instability", "decay", "energy", "audit-e1", "bench")
FIELD_KINDS = ("constant", "power_law", "logarithmic", "sinusoidal", "tabulated")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


def _nonzero(label: str):
    def check(v: float) -> float:
        if v == 0:
            raise ValueError(f"{label} != 0")
        return v
    return check


class ParamsBlock(_Strict):
    c: float = Field(1.0, gt=0)
    m: float = Field(1.0, gt=0)
    q: Annotated[float, AfterValidator(_nonzero("params.q"))] = 1.0
    n: Literal[1, 2] = 1


# ---- bloques de campo (discriminados por "kind") ----

class ConstantSpec(_Strict):
    kind: Literal["constant"]
    E0: Optional[List[float]] = None


class PowerLawSpec(_Strict):
    kind: Literal["power_law"] = "power_law"
    gamma: float = Field(0.5, gt=0, le=1)
    coefficient: Annotated[float, AfterValidator(_nonzero("field.coefficient"))] = 1.0
    axis: int = Field(0, ge=0, le=1)
    rho: List[float] = []
    theta1: List[Tuple[float, float]] = []
    onset: float = Field(0.0, ge=0)

    @model_validator(mode="after")
    def _theta1_needs_linear(self):
        if self.theta1 and self.gamma != 1:
            raise ValueError("field.theta1 solo con field.gamma = 1")
        return self


class LogarithmicSpec(_Strict):
    kind: Literal["logarithmic"]
    e3: Annotated[float, AfterValidator(_nonzero("field.e3"))] = 1.0
    e4: float = Field(1.0, gt=0)
    axis: int = Field(0, ge=0, le=1)


class SinusoidalSpec(_Strict):
    kind: Literal["sinusoidal"]
    gamma: float = Field(0.5, gt=0, le=1)
    coefficient: Annotated[float, AfterValidator(_nonzero("field.coefficient"))] = 1.0
    amplitude: float = 1.0
    frequency: float = Field(1.0, gt=0)
    onset: float = Field(0.0, ge=0)


class TabulatedSpec(_Strict):
    kind: Literal["tabulated"]
    samples: Optional[List[List[float]]] = None
    path: Optional[str] = None
    order: Literal[3, 5] = 3

    @model_validator(mode="after")
    def _one_source(self):
        if (self.samples is None) == (self.path is None):
            raise ValueError("exactamente uno de field.samples o field.path")
        return self


FieldSpec = Annotated[
    Union[ConstantSpec, PowerLawSpec, LogarithmicSpec, SinusoidalSpec, TabulatedSpec],
    Field(discriminator="kind"),
]


# ---- resto de bloques ----

class GridBlock(_Strict):
    half_width: Optional[List[Annotated[float, Field(gt=0)]]] = None
    points: Optional[List[Annotated[int, Field(ge=8)]]] = None


class TimesBlock(_Strict):
    t_min: float = Field(1.0, gt=0)
    t_max: float = Field(1e4, gt=0)
    samples: int = Field(64, ge=2)

    @model_validator(mode="after")
    def _ordered(self):
        if self.t_max <= self.t_min:
            raise ValueError("times.t_max > times.t_min")
        return self


class ToleranceBlock(_Strict):
    mode: float = Field(1e-10, ge=1e-13, le=1e-4)
    slope: float = Field(0.03, gt=0)
    symmetry: float = Field(0.02, gt=0)
    decay_margin: float = Field(0.05, gt=0)
    consistency: float = Field(0.05, gt=0)
    drift: float = Field(0.01, gt=0)
    min_r_squared: float = Field(0.98, ge=0, le=1)
    oracle: float = Field(1e-8, gt=0)
    cross_path: float = Field(1e-8, gt=0)
    norm_preservation: float = Field(1e-10, gt=0)
    determinant: float = Field(1e-8, gt=0)
    wronskian_target: float = Field(1e-7, gt=0)


class InitialBlock(_Strict):
    center: Optional[List[float]] = None
    width: Optional[float] = Field(None, gt=0)
    polarization: Literal["positive", "negative", "independent"] = "positive"
    states: int = Field(3, ge=3)


class OperatorNormBlock(_Strict):
    samples: int = Field(64, ge=64)
    window: Optional[List[Tuple[float, float]]] = None
    refine: bool = True


class FitBlock(_Strict):
    decades: float = Field(2.0, gt=0)
    min_samples: int = Field(8, ge=8)


class AuditBlock(_Strict):
    horizons: List[float] = [1e2, 1e3, 1e4]
    a: Optional[List[float]] = None
    t_start: float = Field(1.0, gt=0)


class BenchBlock(_Strict):
    modes: int = Field(1024, ge=1)
    t_end: float = Field(1e3, gt=0)
    probe_modes: int = Field(4, ge=1)
    worker_counts: Optional[List[Annotated[int, Field(ge=1)]]] = None


class RunConfig(_Strict):
    experiment: Optional[Literal[EXPERIMENTS]] = None
    params: ParamsBlock = ParamsBlock()
    field: FieldSpec = PowerLawSpec()
    grid: GridBlock = GridBlock()
    times: TimesBlock = TimesBlock()
    alpha_list: List[float] = [0.25, -0.25]
    theta_list: List[float] = [0.0, 0.25]
    tolerances: ToleranceBlock = ToleranceBlock()
    initial: InitialBlock = InitialBlock()
    operator_norm: OperatorNormBlock = OperatorNormBlock()
    fit: FitBlock = FitBlock()
    audit: AuditBlock = AuditBlock()
    bench: BenchBlock = BenchBlock()
    route: Optional[Literal["direct", "amplitude_phase"]] = None
    oracle_max_modes: int = Field(64, ge=0)
    seed: int = Field(0, ge=0)
    output_dir: Optional[str] = None

    @model_validator(mode="before")
    @classmethod
    def _default_kind(cls, data):
        if isinstance(data, dict) and isinstance(data.get("field"), dict) and "kind" not in data["field"]:
            data = dict(data)
            data["field"] = {**data["field"], "kind": "power_law"}
        return data

    @model_validator(mode="after")
    def _dimensions(self):
        n = self.params.n
        if self.grid.half_width is not None and len(self.grid.half_width) != n:
            raise ValueError(f"len(grid.half_width) == params.n ({n})")
        if self.grid.points is not None and len(self.grid.points) != n:
            raise ValueError(f"len(grid.points) == params.n ({n})")
        if self.initial.center is not None and len(self.initial.center) != n:
            raise ValueError(f"len(initial.center) == params.n ({n})")
        if self.audit.a is not None and len(self.audit.a) != n:
            raise ValueError(f"len(audit.a) == params.n ({n})")
        if self.operator_norm.window is not None and len(self.operator_norm.window) != n:
            raise ValueError(f"len(operator_norm.window) == params.n ({n})")
        return self


# ---- traducción de errores de pydantic ----

_OPS = {"gt": ">", "ge": ">=", "lt": "<", "le": "<="}


def _path(loc) -> str:
    parts = [str(p) for p in loc]
    # la etiqueta del union discriminado no es una clave del documento
    if len(parts) > 1 and parts[0] == "field" and parts[1] in FIELD_KINDS:
        parts.pop(1)
    return ".".join(parts)


def _diagnose(err: ValidationError) -> Exception:
    errors = err.errors()
    for e in errors:
        if e["type"] == "extra_forbidden":
            return UnknownKeyError(_path(e["loc"]))
    e = errors[0]
    key = _path(e["loc"])
    ctx = e.get("ctx") or {}
    for name, op in _OPS.items():
        if name in ctx:
            return ConstraintError(key, f"{key} {op} {ctx[name]}")
    if e["type"] == "literal_error":
        return ConstraintError(key, f"{key} in {ctx.get('expected')}")
    if e["type"] == "union_tag_invalid":
        return ConstraintError(key, f"{key}.kind in {FIELD_KINDS}")
    msg = e["msg"].removeprefix("Value error, ")
    if not key:
        # validadores de modelo: el mensaje ya nombra la clave
        return ConstraintError(msg.split()[0], msg)
    return ConstraintError(key, msg if key in msg else f"{key}: {msg}")


def parse_config(document: str) -> RunConfig:
    """Texto JSON → RunConfig validado, o el error correspondiente."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"JSON inválido: {exc.msg} (línea {exc.lineno}, columna {exc.colno})") from exc
    if not isinstance(data, dict):
        raise ConfigParseError("el documento debe ser un objeto JSON")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise _diagnose(exc) from exc

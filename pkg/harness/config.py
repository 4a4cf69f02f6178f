# harness/config.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from core.config import settings
from core.errors import ConstraintError
from fields.models import FieldModel, build_field, load_tabulated_csv
from fields.params import PhysicalParams
from modes.dispersion import Dispersion
from propagator.grid import SpectralGrid
from safeguards.config_parser import (
    AuditBlock, BenchBlock, FitBlock, InitialBlock, OperatorNormBlock, RunConfig, ToleranceBlock,
)

logger = logging.getLogger(__name__)


@dataclass
class ExperimentConfig:
    """Configuración ya resuelta: objetos de dominio construidos y validados."""
    params: PhysicalParams
    field: FieldModel
    grid: SpectralGrid
    t_samples: np.ndarray
    alpha_list: List[float]
    theta_list: List[float]
    tolerances: ToleranceBlock = field(default_factory=ToleranceBlock)
    initial: InitialBlock = field(default_factory=InitialBlock)
    operator_norm: OperatorNormBlock = field(default_factory=OperatorNormBlock)
    fit: FitBlock = field(default_factory=FitBlock)
    audit: AuditBlock = field(default_factory=AuditBlock)
    bench: BenchBlock = field(default_factory=BenchBlock)
    seed: int = 0
    route: Optional[str] = None
    workers: int = 1
    oracle_max_modes: int = 64

    def __post_init__(self):
        self.t_samples = np.asarray(self.t_samples, dtype=float).reshape(-1)
        if self.t_samples.size < 2 or np.any(np.diff(self.t_samples) <= 0) or self.t_samples[0] <= 0:
            raise ConstraintError("times", "tiempos positivos estrictamente crecientes")
        if not all(math.isfinite(a) for a in self.alpha_list):
            raise ConstraintError("alpha_list", "alpha_list finito")
        if not all(math.isfinite(th) for th in self.theta_list):
            raise ConstraintError("theta_list", "theta_list finito")
        if self.grid.n != self.params.n:
            raise ConstraintError("grid", f"grid con params.n = {self.params.n} ejes")
        if self.seed < 0:
            raise ConstraintError("seed", "seed >= 0")
        if self.workers < 1:
            raise ConstraintError("workers", "workers >= 1")

    @property
    def disp(self) -> Dispersion:
        return Dispersion(self.params, self.field)

    @property
    def tol(self) -> float:
        return self.tolerances.mode

    def rng(self, stream: int = 0) -> np.random.Generator:
        """Generador determinista por (seed, stream)."""
        return np.random.default_rng([self.seed, stream])

    @classmethod
    def from_run_config(cls, cfg: RunConfig, base_dir: Optional[Path] = None,
                        workers: Optional[int] = None) -> "ExperimentConfig":
        params = PhysicalParams(c=cfg.params.c, m=cfg.params.m, q=cfg.params.q, n=cfg.params.n)
        model = _build_model(cfg, params, base_dir)

        if params.n == 1:
            half, points = settings.GRID_HALF_WIDTH, settings.GRID_POINTS
        else:
            half, points = settings.GRID_HALF_WIDTH_2D, settings.GRID_POINTS_2D
        grid = SpectralGrid(
            half_width=tuple(cfg.grid.half_width or (half,) * params.n),
            points=tuple(cfg.grid.points or (points,) * params.n),
        )
        t_samples = np.geomspace(cfg.times.t_min, cfg.times.t_max, cfg.times.samples)
        return cls(
            params=params, field=model, grid=grid, t_samples=t_samples,
            alpha_list=list(cfg.alpha_list), theta_list=list(cfg.theta_list),
            tolerances=cfg.tolerances, initial=cfg.initial, operator_norm=cfg.operator_norm,
            fit=cfg.fit, audit=cfg.audit, bench=cfg.bench, seed=cfg.seed, route=cfg.route,
            workers=workers or settings.WORKERS, oracle_max_modes=cfg.oracle_max_modes,
        )


def _build_model(cfg: RunConfig, params: PhysicalParams, base_dir: Optional[Path]) -> FieldModel:
    spec = cfg.field.model_dump()
    kind = spec.pop("kind")
    if kind != "tabulated":
        return build_field(kind, params, **spec)

    if spec["path"] is not None:
        path = Path(spec["path"])
        if not path.is_absolute() and base_dir is not None:
            path = Path(base_dir) / path
        times, values = load_tabulated_csv(path, params.n)
    else:
        try:
            rows = np.asarray(spec["samples"], dtype=float)
        except ValueError as exc:
            # filas de distinto largo
            raise ConstraintError("field.samples", f"field.samples: filas [t, E_1..E_{params.n}]") from exc
        if rows.ndim != 2 or rows.shape[1] != params.n + 1:
            raise ConstraintError("field.samples", f"field.samples: filas [t, E_1..E_{params.n}]")
        times, values = rows[:, 0], rows[:, 1:]
    logger.info("campo tabulado: %d muestras, orden %d", times.size, spec["order"])
    return build_field("tabulated", params, times=times, values=values, order=spec["order"])

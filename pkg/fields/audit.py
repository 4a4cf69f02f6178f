# fields/audit.py
"""
Auditor numérico de la condición (E1): integrabilidad de |b'| sobre la región
de bajo impulso y de (|b'|² + |b''|)/(c²|a+b|² + (mc²)²) en todo el eje.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.optimize import bisect

from core.config import settings
from core.errors import ConstraintError, QuadratureError
from fields.models import FieldModel, field_bounds
from fields.params import PhysicalParams

logger = logging.getLogger(__name__)


class Verdict(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    NOT_APPLICABLE = "NOT_APPLICABLE"


@dataclass
class E1Report:
    e0_estimate: float
    e1_estimate: float
    horizon: float
    growth_flag: bool
    verdict: Verdict
    horizons: List[float] = field(default_factory=list)
    e0_series: List[float] = field(default_factory=list)
    e1_series: List[float] = field(default_factory=list)
    radius: float = 0.0
    e00: float = 0.0
    t_start: float = 0.0
    region: List[Tuple[float, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "e0_estimate": self.e0_estimate,
            "e1_estimate": self.e1_estimate,
            "horizon": self.horizon,
            "growth_flag": self.growth_flag,
            "horizons": self.horizons,
            "e0_series": self.e0_series,
            "e1_series": self.e1_series,
            "radius": self.radius,
            "E00": self.e00,
            "t_start": self.t_start,
            "region": [list(iv) for iv in self.region],
        }


def _quad(fun, lo: float, hi: float, depth: int = 0) -> float:
    if hi <= lo:
        return 0.0
    res = quad(fun, lo, hi, epsrel=settings.QUAD_EPSREL, epsabs=settings.QUAD_EPSABS,
               limit=settings.QUAD_LIMIT, full_output=1)
    value, abserr = res[0], res[1]
    if len(res) <= 3 or abserr <= settings.QUAD_FAIL_TOL * max(1.0, abs(value)):
        return value
    message = res[3].strip()
    # redondeo (ier=2): la tolerancia pedida está bajo el ruido de punto flotante
    if "roundoff" in message and abserr <= settings.QUAD_ROUNDOFF_TOL * max(1.0, abs(value)):
        logger.debug("cuadratura con redondeo en [%g, %g]: error=%.3g", lo, hi, abserr)
        return value
    if depth < settings.QUAD_MAX_SPLIT:
        mid = 0.5 * (lo + hi)
        return _quad(fun, lo, mid, depth + 1) + _quad(fun, mid, hi, depth + 1)
    raise QuadratureError(
        f"cuadratura sin convergencia en [{lo:g}, {hi:g}]: "
        f"valor={value:.6g} error={abserr:.3g} ({message})"
    )


def _breakpoints(model: FieldModel, t_start: float, horizons: Sequence[float]) -> np.ndarray:
    """Cortes de integración: cada 8 periodos si el campo oscila; geométricos si no."""
    T = horizons[-1]
    if model.period:
        pts = np.arange(t_start, T, 8 * model.period)
    else:
        pts = t_start * 2.0 ** np.arange(0, int(math.ceil(math.log2(T / t_start))) + 1)
    return np.unique(np.concatenate([pts[pts < T], [t_start], horizons]))


def _sublevel_region(dist, radius: float, t_lo: float, t_hi: float, step: float) -> List[Tuple[float, float]]:
    """Intervalos de {s : dist(s) ≤ radius} detectados en una malla y refinados por bisección."""
    n = int(math.ceil((t_hi - t_lo) / step)) + 1
    grid = np.linspace(t_lo, t_hi, n)
    g = dist(grid) - radius
    inside = g <= 0
    region: List[Tuple[float, float]] = []
    start = t_lo if inside[0] else None
    f = lambda s: float(dist(np.asarray(s)) - radius)
    for i in range(1, n):
        if inside[i] == inside[i - 1]:
            continue
        root = bisect(f, grid[i - 1], grid[i], xtol=1e-10)
        if inside[i]:
            start = root
        else:
            region.append((start, root))
            start = None
    if start is not None:
        region.append((start, t_hi))
    return region


def audit_e1(model: FieldModel, params: PhysicalParams, a: Sequence[float],
             horizons: Sequence[float], t_start: float | None = None) -> E1Report:
    t_start = settings.AUDIT_T_START if t_start is None else t_start
    horizons = [float(h) for h in horizons]
    a = np.asarray(a, dtype=float).reshape(-1)

    # 1) validaciones
    if not t_start > 0:
        raise ConstraintError("audit.t_start", "audit.t_start > 0")
    if not horizons or any(h2 <= h1 for h1, h2 in zip(horizons, horizons[1:])):
        raise ConstraintError("audit.horizons", "audit.horizons estrictamente creciente")
    if horizons[0] <= t_start:
        raise ConstraintError("audit.horizons", f"audit.horizons > t_start ({t_start:g})")
    if a.size != params.n or not np.all(np.isfinite(a)):
        raise ConstraintError("audit.a", f"audit.a finito de dimensión {params.n}")

    mc2 = params.rest_energy
    T = horizons[-1]
    e00, _ = field_bounds(model, t_start, T)
    radius = 2.0 * e00 / mc2

    def dist(s):
        return np.linalg.norm(a + model.b(s), axis=-1)

    def bp_norm(s):
        return float(np.linalg.norm(model.b_prime(s)))

    def e1_integrand(s):
        bp = model.b_prime(s)
        bs = model.b_second(s)
        den = params.c ** 2 * float(np.sum((a + model.b(s)) ** 2)) + mc2 ** 2
        return (float(np.sum(bp ** 2)) + float(np.linalg.norm(bs))) / den

    # 2) región de bajo impulso Ω = {s : |a + b(s)| ≤ 2E₀,₀/(mc²)}
    step = min(1.0, model.period or 1.0) / 8.0
    region = _sublevel_region(dist, radius, t_start, T, step)

    # 3) integrales acumuladas por tramos hasta cada horizonte
    cuts = _breakpoints(model, t_start, horizons)
    e1_cum, e0_cum = 0.0, 0.0
    e0_series: List[float] = []
    e1_series: List[float] = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        e1_cum += _quad(e1_integrand, lo, hi)
        for r_lo, r_hi in region:
            e0_cum += _quad(bp_norm, max(lo, r_lo), min(hi, r_hi))
        if any(math.isclose(hi, h, rel_tol=0, abs_tol=1e-12 * h) for h in horizons):
            e0_series.append(e0_cum)
            e1_series.append(e1_cum)
            logger.info("E1 horizonte T=%g: e0=%.6g e1=%.6g", hi, e0_cum, e1_cum)

    # 4) aplicable si |b| crece a lo largo de los horizontes (no depende de a)
    sizes = np.linalg.norm(model.b(np.asarray(horizons)), axis=-1)
    applicable = bool(np.all(np.diff(sizes) > 0)) and sizes[-1] > radius
    growth = False
    if applicable and len(horizons) > 1:
        for series in (e0_series, e1_series):
            prev, last = series[-2], series[-1]
            if last - prev > settings.AUDIT_GROWTH_THRESHOLD * max(abs(prev), 1e-12):
                growth = True

    if not applicable:
        verdict = Verdict.NOT_APPLICABLE
    elif growth:
        verdict = Verdict.FAIL
    else:
        verdict = Verdict.PASS
    logger.info("auditoría E1 (%s): %s", model.kind, verdict.value)

    return E1Report(
        e0_estimate=e0_series[-1], e1_estimate=e1_series[-1], horizon=T,
        growth_flag=growth, verdict=verdict, horizons=horizons,
        e0_series=e0_series, e1_series=e1_series, radius=radius, e00=e00,
        t_start=t_start, region=region,
    )

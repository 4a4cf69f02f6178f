# modes/checks.py
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from core.errors import InvariantViolation
from fields.models import field_bounds
from modes.dispersion import Dispersion
from modes.solvers import phase_trig
from modes.trajectory import ModeTrajectory

logger = logging.getLogger(__name__)


def wronskian_deviation(traj: ModeTrajectory) -> float:
    if traj.times.size == 0:
        raise InvariantViolation("trayectoria vacía")
    return float(np.max(np.abs(traj.wronskian - 1.0)))


@dataclass(frozen=True)
class Envelope:
    g0_sup: float
    g0_inf: float
    g1_sup: float
    g1_inf: float

    def to_dict(self) -> dict:
        return {"G0_sup": self.g0_sup, "G0_inf": self.g0_inf,
                "G1_sup": self.g1_sup, "G1_inf": self.g1_inf}


def envelope_check(traj: ModeTrajectory) -> Envelope:
    """Extremos de 𝒢₀ = A(Q/Q₀)^{1/2} y 𝒢₁ = C(QQ₀)^{1/2}; exige A, C > 0."""
    for name in ("A", "C", "G0", "G1"):
        values = getattr(traj, name)
        if not np.all(values > 0):
            k = int(np.argmin(values))
            raise InvariantViolation(
                f"{name} no positivo en t={traj.times[k]:g} (ξ={traj.xi.tolist()}, ruta {traj.method})"
            )
    env = Envelope(float(traj.G0.max()), float(traj.G0.min()),
                   float(traj.G1.max()), float(traj.G1.min()))
    logger.debug("envolventes ξ=%s: %s", traj.xi.tolist(), env)
    return env


@dataclass(frozen=True)
class PhaseRateReport:
    ok: bool
    min_ratio: float
    checked: int


def phase_rate_check(traj: ModeTrajectory, disp: Dispersion, e00: Optional[float] = None) -> PhaseRateReport:
    """
    Fuera de la región de bajo impulso |ξ+b| > 2E₀,₀/(mc²) la fase crece al menos
    a ritmo Q/2: B' = Q − (Q'/Q) sin B cos B ≥ Q/2.
    """
    t = traj.times[traj.times > 0]
    if t.size == 0:
        return PhaseRateReport(True, float("inf"), 0)
    if e00 is None:
        e00, _ = field_bounds(disp.model, float(t[0]), float(t[-1]))
    radius = 2.0 * e00 / disp.params.rest_energy
    b = disp.model.b(t)
    bp = disp.model.b_prime(t)
    shifted = traj.xi + b
    mask = np.linalg.norm(shifted, axis=-1) > radius
    if not np.any(mask):
        return PhaseRateReport(True, float("inf"), 0)
    g = disp.log_derivative(t, traj.xi, b=b, b_prime=bp)
    Q = np.sqrt(disp.L(t, traj.xi))
    B = traj.B[traj.times > 0]
    sB, cB = phase_trig(B)
    ratio = (Q - g * sB * cB) / Q
    min_ratio = float(ratio[mask].min())
    return PhaseRateReport(min_ratio >= 0.5, min_ratio, int(mask.sum()))

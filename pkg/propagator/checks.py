# propagator/checks.py
from __future__ import annotations

import numpy as np

from core.errors import ConstraintError
from modes.dispersion import Dispersion
from modes.trajectory import ModeTrajectory


def pde_residual(disp: Dispersion, traj: ModeTrajectory, coefficients=(1.0, 0.0)) -> float:
    """
    max_k |Δ²û/Δt² + L(t_k, ξ) û(t_k)| con û = c₀ζ₀ − i c₁ζ₁ sobre muestras
    equiespaciadas; escala como Δt² si la trayectoria resuelve ζ'' + Lζ = 0.
    """
    t = traj.times
    dt = np.diff(t)
    if t.size < 3 or not np.allclose(dt, dt[0], rtol=1e-9, atol=0):
        raise ConstraintError("times", "muestras equiespaciadas (al menos 3)")
    c0, c1 = coefficients
    u = c0 * traj.zeta0 - 1j * c1 * traj.zeta1
    h = dt[0]
    second = (u[2:] - 2 * u[1:-1] + u[:-2]) / h ** 2
    L = disp.L(t[1:-1], traj.xi)
    return float(np.max(np.abs(second + L * u[1:-1])))

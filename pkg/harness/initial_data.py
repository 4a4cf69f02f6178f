# harness/initial_data.py
"""
Datos iniciales con soporte espectral compacto: ψ̂₀,₀ es un bump C₀^∞
exp(−1/(1−r²)), r = |ξ−ξ₀|/w, con fase global aleatoria; ψ̂₀,₁ se fija según
la polarización. El soporte queda dentro de la mitad central de la banda.
"""
from __future__ import annotations

import logging
import math
from typing import Optional, Sequence

import numpy as np

from core.errors import ConstraintError
from modes.dispersion import Dispersion
from propagator.grid import SpectralGrid
from propagator.state import SpectralState

logger = logging.getLogger(__name__)

POLARIZATIONS = ("positive", "negative", "independent")


def spectral_bump(grid: SpectralGrid, center: Sequence[float], width: float) -> np.ndarray:
    rel = (grid.xi_mesh - np.asarray(center, dtype=float)) / width
    r2 = np.sum(rel ** 2, axis=-1)
    out = np.zeros(grid.shape)
    inside = r2 < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return out


def _draw_support(grid: SpectralGrid, rng: np.random.Generator,
                  center: Optional[Sequence[float]], width: Optional[float]):
    limit = 0.5 * min(grid.xi_max)
    if width is None:
        width = float(rng.uniform(0.2, 0.4) * limit)
    if center is None:
        reach = max(limit - width, 0.0) / 2
        center = rng.uniform(-reach, reach, size=grid.n)
    center = np.asarray(center, dtype=float)
    if np.any(np.abs(center) + width >= limit):
        raise ConstraintError(
            "initial", f"|initial.center| + initial.width < {limit:g} (mitad central de la banda)"
        )
    # al menos un punto de la grilla dual dentro del soporte
    if width <= min(grid.dxi) / 2:
        raise ConstraintError("initial.width", f"initial.width > {min(grid.dxi) / 2:g}")
    return center, float(width)


def initial_pair(grid: SpectralGrid, disp: Dispersion, rng: np.random.Generator, *,
                 center: Optional[Sequence[float]] = None, width: Optional[float] = None,
                 polarization: str = "positive") -> SpectralState:
    """Ψ₀ = (ψ₀,₀, ψ₀,₁) en la grilla; la polarización positiva da ψ̂₀,₁ = Q(0,ξ)ψ̂₀,₀."""
    if polarization not in POLARIZATIONS:
        raise ConstraintError("initial.polarization", f"initial.polarization in {POLARIZATIONS}")
    center, width = _draw_support(grid, rng, center, width)
    phase = np.exp(1j * rng.uniform(0.0, 2 * math.pi))
    hat0 = phase * spectral_bump(grid, center, width)
    Q0 = np.sqrt(disp.L0(grid.xi_mesh))

    if polarization == "positive":
        hat1 = Q0 * hat0
    elif polarization == "negative":
        hat1 = -Q0 * hat0
    else:
        c1, w1 = _draw_support(grid, rng, None, None)
        hat1 = np.exp(1j * rng.uniform(0.0, 2 * math.pi)) * Q0 * spectral_bump(grid, c1, w1)

    logger.debug("dato inicial: centro=%s ancho=%.4g polarización=%s", center, width, polarization)
    return SpectralState.from_spectral(grid, hat0.astype(np.complex128), hat1.astype(np.complex128))

# propagator/norms.py
"""
Normas sobre la grilla dual: norma de operador exacta por modos (U es una fase
unitaria por un multiplicador de Fourier, así que ‖U‖ = sup_ξ σ_max(M_α)),
normas de Sobolev ‖L(0,p)^θ ψ‖ y los pesos K_α^{1/2}.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.config import settings
from core.errors import ConstraintError
from modes.dispersion import Dispersion
from modes.solvers import solve_batch
from propagator.apply import support_mask
from propagator.state import SpectralState
from propagator.symbol import assemble_symbol, singular_values, symbol_entries
from propagator.sweep import solve_modes

logger = logging.getLogger(__name__)

Window = List[Tuple[float, float]]


# ---- pesos de Sobolev y K_α^{1/2} ----

def _L0_physical(state: SpectralState, disp: Dispersion) -> np.ndarray:
    """L(0, ξ + b): el operador p actúa sobre e^{ib·x}·envolvente como ξ + b."""
    return disp.L0(state.physical_xi)


def sobolev_norm(state: SpectralState, disp: Dispersion, theta: float, component: int = 1) -> float:
    if component not in (1, 2):
        raise ConstraintError("component", "component in {1, 2}")
    hat = state.spectral()[component - 1]
    weight = _L0_physical(state, disp) ** theta
    total = np.sum(np.abs(weight * hat) ** 2) * state.grid.dual_volume
    return float(math.sqrt(total))


def k_alpha_half(state: SpectralState, disp: Dispersion, alpha: float,
                 direction: str = "forward") -> SpectralState:
    """diag(L(0,ξ)^{1/4−α/2}, L(0,ξ)^{−1/4−α/2}) como multiplicador (o su inversa)."""
    if direction not in ("forward", "inverse"):
        raise ConstraintError("direction", "direction in {forward, inverse}")
    L0 = _L0_physical(state, disp)
    w1, w2 = L0 ** (0.25 - alpha / 2), L0 ** (-0.25 - alpha / 2)
    hat1, hat2 = state.spectral()
    if direction == "forward":
        tag = alpha
        hat1, hat2 = w1 * hat1, w2 * hat2
    else:
        tag = None
        hat1, hat2 = hat1 / w1, hat2 / w2
    return SpectralState.from_spectral(state.grid, hat1, hat2, tag, state.momentum_shift)


def k_alpha_norm(state: SpectralState, disp: Dispersion, alpha: float) -> float:
    """‖Ψ‖_{𝒦_α} = ‖K_α^{1/2} Ψ‖_ℋ."""
    return k_alpha_half(state, disp, alpha, "forward").norm()


# ---- norma de operador ----

def default_window(disp: Dispersion, t_hi: float) -> Window:
    """±(8mc²/c + sup|b|) por eje, con sup|b| sobre [0, t_hi]."""
    probe = np.linspace(0.0, t_hi, 2049)
    sup_b = float(np.max(np.linalg.norm(disp.model.b(probe), axis=-1))) if t_hi > 0 else 0.0
    half = 8.0 * disp.params.rest_energy / disp.params.c + sup_b
    return [(-half, half)] * disp.params.n


def _xi_samples(window: Window, samples: int) -> np.ndarray:
    axes = [np.linspace(lo, hi, samples) for lo, hi in window]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack(mesh, axis=-1).reshape(-1, len(window))


@dataclass
class OperatorNormSeries:
    times: np.ndarray
    upper: np.ndarray
    lower: np.ndarray
    window: Window
    samples: int


def _sigma_series(disp, times, alpha, window, samples, tol, route, workers):
    xis = _xi_samples(window, samples)
    batch = solve_modes(disp, xis, times, tol=tol, route=route, workers=workers)
    L0 = disp.L0(xis)
    upper, lower = [], []
    for k, t in enumerate(batch.times):
        if k == 0:
            upper.append(1.0)
            lower.append(1.0)
            continue
        M = symbol_entries(batch.zeta0[k], batch.zeta0_prime[k], batch.zeta1[k],
                           batch.zeta1_prime[k], batch.Q[k] ** 2, L0, alpha)
        smax, smin = singular_values(M)
        upper.append(float(smax.max()))
        lower.append(float(smin.min()))
    return batch.times, np.asarray(upper), np.asarray(lower)


def operator_norm_series(disp: Dispersion, times: Sequence[float], alpha: float,
                         xi_window: Optional[Window] = None, samples: Optional[int] = None, *,
                         refine: bool = True, tol: Optional[float] = None,
                         route: Optional[str] = None, workers: Optional[int] = None) -> OperatorNormSeries:
    """
    sup_ξ σ_max(M_α(t, ξ)) e inf_ξ σ_min en una ventana de ξ, para varios t con
    un solo barrido. Con refine=True se duplica el muestreo y se ensancha la
    ventana 1.5× hasta que el máximo cambie menos de OPNORM_REL_CHANGE.
    Es la norma en ℬ(ℋ) restringida a la ventana muestreada.
    """
    samples = settings.OPNORM_SAMPLES if samples is None else samples
    if samples < 64:
        raise ConstraintError("operator_norm.samples", "operator_norm.samples >= 64")
    times = np.asarray(times, dtype=float).reshape(-1)
    window = list(xi_window) if xi_window else default_window(disp, float(times.max()))
    if len(window) != disp.params.n:
        raise ConstraintError("operator_norm.window", f"una ventana por eje ({disp.params.n})")

    grid_t, upper, lower = _sigma_series(disp, times, alpha, window, samples, tol, route, workers)
    if refine:
        for r in range(settings.OPNORM_MAX_REFINE):
            samples *= 2
            window = [(1.5 * lo, 1.5 * hi) for lo, hi in window]
            _, new_upper, new_lower = _sigma_series(disp, times, alpha, window, samples, tol, route, workers)
            change = float(np.max(np.abs(new_upper - upper) / upper))
            upper, lower = new_upper, np.minimum(lower, new_lower)
            logger.info("norma de operador: refinamiento %d, %d muestras, cambio %.3g", r + 1, samples, change)
            if change < settings.OPNORM_REL_CHANGE:
                break

    keep = np.isin(grid_t, times)
    return OperatorNormSeries(grid_t[keep], upper[keep], lower[keep], window, samples)


def operator_norm(disp: Dispersion, t: float, alpha: float, xi_window: Optional[Window] = None,
                  samples: Optional[int] = None, **kw) -> float:
    if t == 0:
        return 1.0
    return float(operator_norm_series(disp, [t], alpha, xi_window, samples, **kw).upper[-1])


# ---- oráculo por suma de modos ----

def mode_sum_norm(state0: SpectralState, disp: Dispersion, times: Sequence[float], alpha: float,
                  tol: Optional[float] = None, route: Optional[str] = None) -> np.ndarray:
    """
    ‖U₀,α(t)Φ₀‖ sin FFT: cada modo del soporte se integra por separado y se
    ensambla su símbolo; Σ_k |M_k v_k|² dξ^n.
    """
    times = np.asarray(times, dtype=float).reshape(-1)
    hat1, hat2 = state0.spectral()
    mask = support_mask(hat1, hat2)
    xis = state0.grid.xi_mesh[mask]
    v1, v2 = hat1[mask], hat2[mask]
    acc = np.zeros(times.size)
    for k in range(xis.shape[0]):
        traj = solve_batch(disp, xis[k], times[times > 0], tol=tol, route=route).trajectory(0)
        for j, t in enumerate(times):
            M = assemble_symbol(disp, traj, float(t), alpha).entries
            w = M @ np.array([v1[k], v2[k]])
            acc[j] += float(np.sum(np.abs(w) ** 2))
    return np.sqrt(acc * state0.grid.dual_volume)

# propagator/apply.py
"""
Aplicación de U₀,α(t): FFT de ambas componentes, multiplicación punto a punto
por M_α(t, ξ) en la grilla dual, FFT inversa y fase e^{ib(t)·x}. La fase se
registra en `momentum_shift`; la grilla solo tiene que contener el soporte
espectral inicial.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from core.config import settings
from core.errors import ConstraintError
from modes.dispersion import Dispersion
from modes.solvers import ModeBatch
from propagator.state import SpectralState
from propagator.symbol import symbol_entries
from propagator.sweep import solve_modes

logger = logging.getLogger(__name__)


def support_mask(hat1: np.ndarray, hat2: np.ndarray) -> np.ndarray:
    dens = np.abs(hat1) + np.abs(hat2)
    peak = dens.max()
    if peak == 0:
        return np.zeros(dens.shape, dtype=bool)
    return dens > settings.SUPPORT_CUTOFF * peak


def _prepare(state0: SpectralState, alpha: Optional[float]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    if any(state0.momentum_shift):
        raise ConstraintError("state", "el estado inicial no debe llevar fase de gauge (b = 0)")
    if alpha is not None and state0.alpha is not None and state0.alpha != alpha:
        raise ConstraintError("alpha", f"estado preparado con α={state0.alpha}, se pidió α={alpha}")
    state0.check_aliasing()
    hat1, hat2 = state0.spectral()
    return hat1, hat2, support_mask(hat1, hat2)


@dataclass
class SupportSweep:
    """Modos resueltos sobre una máscara de la grilla dual."""
    mask: np.ndarray
    batch: Optional[ModeBatch]


def sweep_support(state0: SpectralState, disp: Dispersion, times: Sequence[float], *,
                  tol: Optional[float] = None, route: Optional[str] = None,
                  workers: Optional[int] = None) -> SupportSweep:
    """Barrido del soporte espectral de state0, reutilizable para K_α^{1/2}state0 con cualquier α."""
    times = np.asarray(times, dtype=float).reshape(-1)
    hat1, hat2 = state0.spectral()
    mask = support_mask(hat1, hat2)
    xis = state0.grid.xi_mesh[mask]
    positive = times[times > 0]
    batch = None
    if positive.size and xis.shape[0]:
        batch = solve_modes(disp, xis, positive, tol=tol, route=route, workers=workers)
    return SupportSweep(mask, batch)


def evolve(state0: SpectralState, disp: Dispersion, times: Sequence[float],
           alpha: Optional[float] = 0.0, *, convention: str = "standard",
           tol: Optional[float] = None, route: Optional[str] = None,
           workers: Optional[int] = None, bare: bool = False,
           sweep: Optional[SupportSweep] = None) -> Iterator[Tuple[float, SpectralState]]:
    """
    Genera (t, Φ(t)) para los tiempos pedidos con un único barrido de modos.
    bare=True usa la matriz sin pesos: evoluciona el par Ψ = (ψ₀, (i∂ₜ + q_E)ψ₀).
    `sweep` (de sweep_support sobre un estado con el mismo soporte) evita re-resolver.
    """
    times = np.asarray(times, dtype=float).reshape(-1)
    weight_alpha = None if bare else alpha
    tag = None if bare else alpha
    hat1, hat2, mask = _prepare(state0, weight_alpha)
    grid = state0.grid
    positive = times[times > 0]
    batch = None
    if sweep is not None:
        dens = np.abs(hat1) + np.abs(hat2)
        if np.any(dens[~sweep.mask] > 1e-12 * dens.max()):
            raise ConstraintError("sweep", "el soporte del estado excede el barrido")
        mask, batch = sweep.mask, sweep.batch
        if batch is not None and not np.all(np.isin(positive, batch.times)):
            raise ConstraintError("sweep", "el barrido no contiene todos los tiempos pedidos")
    xis = grid.xi_mesh[mask]
    v = np.stack([hat1[mask], hat2[mask]], axis=-1)

    if batch is None and positive.size and xis.shape[0]:
        batch = solve_modes(disp, xis, positive, tol=tol, route=route, workers=workers)
    if batch is not None:
        L0 = disp.L0(xis)
        b_all = disp.model.b(batch.times)

    for t in times:
        if t == 0:
            yield 0.0, SpectralState(grid, state0.phi1.copy(), state0.phi2.copy(), tag)
            continue
        if batch is None:
            shift = tuple(float(x) for x in disp.model.b(t))
            zero = np.zeros(grid.shape, dtype=np.complex128)
            yield float(t), SpectralState(grid, zero, zero.copy(), tag, shift)
            continue
        k = int(np.searchsorted(batch.times, t))
        M = symbol_entries(batch.zeta0[k], batch.zeta0_prime[k], batch.zeta1[k], batch.zeta1_prime[k],
                           batch.Q[k] ** 2, L0, weight_alpha, convention)
        w = np.einsum("kij,kj->ki", M, v)
        out1 = np.zeros(grid.shape, dtype=np.complex128)
        out2 = np.zeros(grid.shape, dtype=np.complex128)
        out1[mask] = w[:, 0]
        out2[mask] = w[:, 1]
        state = SpectralState.from_spectral(grid, out1, out2, tag, tuple(float(x) for x in b_all[k]))
        state.check_aliasing()
        yield float(t), state


def apply_propagator(state0: SpectralState, disp: Dispersion, t: float, alpha: float, *,
                     convention: str = "standard", tol: Optional[float] = None,
                     route: Optional[str] = None, workers: Optional[int] = None) -> SpectralState:
    """Φ(t) = U₀,α(t) Φ₀."""
    if t < 0:
        raise ConstraintError("t", "t >= 0")
    *_, (_, state) = evolve(state0, disp, [t], alpha, convention=convention, tol=tol,
                            route=route, workers=workers)
    return state

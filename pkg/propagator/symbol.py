# propagator/symbol.py
"""
Símbolo 2×2 de U₀,α(t). Con û = ζ₀ψ̂₀,₀ − iζ₁ψ̂₀,₁ e i∂ₜû = iζ₀'ψ̂₀,₀ + ζ₁'ψ̂₀,₁:

    M_α = diag(L^{1/4−α/2}, L^{−1/4−α/2}) · [[ζ₀, −iζ₁], [iζ₀', ζ₁']] · diag(L₀^{−1/4+α/2}, L₀^{1/4+α/2})

con M_α(0) = I y det M_α = ℒ_α² W, ℒ_α = (L/L₀)^{−α/2}. La convención
"hochstadt" usa [[ζ₀, ζ₁], [iζ₀', iζ₁']], que difiere en el factor unitario
diag(1, i) a la derecha: mismas normas y valores singulares.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from core.errors import ConstraintError
from modes.dispersion import Dispersion
from modes.trajectory import ModeTrajectory

CONVENTIONS = ("standard", "hochstadt")


def symbol_entries(z0, z0p, z1, z1p, L, L0, alpha: float | None, convention: str = "standard") -> np.ndarray:
    """Matrices (..., 2, 2). alpha=None da la matriz sin pesos (evolución del par Ψ)."""
    if convention not in CONVENTIONS:
        raise ConstraintError("convention", f"convention in {CONVENTIONS}")
    z0, z0p, z1, z1p = (np.asarray(v, dtype=float) for v in (z0, z0p, z1, z1p))
    if alpha is None:
        w00 = w01 = w10 = w11 = 1.0
    else:
        ratio = np.asarray(L, dtype=float) / np.asarray(L0, dtype=float)
        w00 = ratio ** (0.25 - alpha / 2)
        w11 = ratio ** (-0.25 - alpha / 2)
        w01 = L ** (0.25 - alpha / 2) * L0 ** (0.25 + alpha / 2)
        w10 = L ** (-0.25 - alpha / 2) * L0 ** (-0.25 + alpha / 2)
    M = np.empty(np.broadcast(z0, np.asarray(L)).shape + (2, 2), dtype=np.complex128)
    if convention == "standard":
        M[..., 0, 0] = w00 * z0
        M[..., 0, 1] = -1j * w01 * z1
        M[..., 1, 0] = 1j * w10 * z0p
        M[..., 1, 1] = w11 * z1p
    else:
        M[..., 0, 0] = w00 * z0
        M[..., 0, 1] = w01 * z1
        M[..., 1, 0] = 1j * w10 * z0p
        M[..., 1, 1] = 1j * w11 * z1p
    return M


def singular_values(M: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """σ_max, σ_min de matrices (..., 2, 2)."""
    s = np.linalg.svd(M, compute_uv=False)
    return s[..., 0], s[..., 1]


@dataclass(frozen=True)
class PropagatorSymbol:
    t: float
    xi: np.ndarray
    alpha: float
    entries: np.ndarray
    L_t: float
    L_0: float
    convention: str = "standard"

    @property
    def det(self) -> complex:
        M = self.entries
        return complex(M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0])

    @property
    def ell_alpha(self) -> float:
        return float((self.L_t / self.L_0) ** (-self.alpha / 2))

    @property
    def singular_values(self) -> Tuple[float, float]:
        smax, smin = singular_values(self.entries)
        return float(smax), float(smin)


def assemble_symbol(disp: Dispersion, traj: ModeTrajectory, t: float, alpha: float,
                    convention: str = "standard") -> PropagatorSymbol:
    z0, z0p, z1, z1p = traj.state_at(t)
    xi = np.asarray(traj.xi, dtype=float)
    L0 = float(disp.L0(xi))
    Lt = L0 if t == 0 else float(disp.L(t, xi))
    M = symbol_entries(z0, z0p, z1, z1p, Lt, L0, alpha, convention)
    return PropagatorSymbol(t=float(t), xi=xi, alpha=alpha, entries=M, L_t=Lt, L_0=L0,
                            convention=convention)

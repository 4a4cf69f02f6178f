# propagator/grid.py
"""
Grilla periódica [-X, X)^n con N = 2^k puntos por eje y su grilla dual
(espaciado π/X). Transformada unitaria con núcleo (2π)^{-n/2} e^{-iξ·x}:

    ψ̂(ξ_k) = (dx/√(2π))^n Σ_j φ(x_j) e^{-iξ_k·x_j}

de modo que Σ|φ|² dx^n = Σ|ψ̂|² dξ^n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Tuple

import numpy as np

from core.errors import ConstraintError


@dataclass(frozen=True)
class SpectralGrid:
    half_width: Tuple[float, ...]
    points: Tuple[int, ...]

    def __post_init__(self):
        if len(self.half_width) != len(self.points) or len(self.points) not in (1, 2):
            raise ConstraintError("grid", "grid con 1 o 2 ejes, half_width y points de igual largo")
        for X in self.half_width:
            if not (X > 0 and math.isfinite(X)):
                raise ConstraintError("grid.half_width", "grid.half_width > 0")
        for N in self.points:
            if N < 8 or N & (N - 1):
                raise ConstraintError("grid.points", "grid.points potencia de dos >= 8")

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.points)

    @property
    def dx(self) -> Tuple[float, ...]:
        return tuple(2 * X / N for X, N in zip(self.half_width, self.points))

    @property
    def dxi(self) -> Tuple[float, ...]:
        return tuple(math.pi / X for X in self.half_width)

    @property
    def xi_max(self) -> Tuple[float, ...]:
        return tuple(math.pi * N / (2 * X) for X, N in zip(self.half_width, self.points))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.dx))

    @property
    def dual_volume(self) -> float:
        return float(np.prod(self.dxi))

    def x_axis(self, axis: int) -> np.ndarray:
        X, N = self.half_width[axis], self.points[axis]
        return -X + np.arange(N) * (2 * X / N)

    def xi_axis(self, axis: int) -> np.ndarray:
        """Frecuencias en orden FFT."""
        return 2 * math.pi * np.fft.fftfreq(self.points[axis], d=self.dx[axis])

    @cached_property
    def x_mesh(self) -> np.ndarray:
        axes = np.meshgrid(*(self.x_axis(a) for a in range(self.n)), indexing="ij")
        return np.stack(axes, axis=-1)

    @cached_property
    def xi_mesh(self) -> np.ndarray:
        axes = np.meshgrid(*(self.xi_axis(a) for a in range(self.n)), indexing="ij")
        return np.stack(axes, axis=-1)

    @cached_property
    def _kernel_phase(self) -> np.ndarray:
        # e^{iξ·X}: el primer punto de la grilla está en x = -X
        return np.exp(1j * np.sum(self.xi_mesh * np.asarray(self.half_width), axis=-1))

    def forward(self, phi: np.ndarray) -> np.ndarray:
        scale = float(np.prod([d / math.sqrt(2 * math.pi) for d in self.dx]))
        return np.fft.fftn(phi) * scale * self._kernel_phase

    def inverse(self, hat: np.ndarray) -> np.ndarray:
        scale = float(np.prod([math.sqrt(2 * math.pi) / d for d in self.dx]))
        return np.fft.ifftn(hat / self._kernel_phase) * scale

    def outer_mask(self) -> np.ndarray:
        """Cuarto exterior de la grilla dual (alguna componente |ξ_a| > 3/4 ξ_max)."""
        lim = 0.75 * np.asarray(self.xi_max)
        return np.any(np.abs(self.xi_mesh) > lim, axis=-1)

    def central_mask(self) -> np.ndarray:
        lim = 0.5 * np.asarray(self.xi_max)
        return np.all(np.abs(self.xi_mesh) < lim, axis=-1)

    def to_dict(self) -> dict:
        return {"half_width": list(self.half_width), "points": list(self.points)}

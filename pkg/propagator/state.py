# propagator/state.py
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from core.config import settings
from core.errors import AliasingError, ConstraintError
from propagator.grid import SpectralGrid

MAGIC = b"KGSS"

# Cabecera del contenedor binario; los datos siguen como float64 (re, im)
# intercalados: φ₁ completo y luego φ₂.
HEADER_DTYPE = np.dtype([
    ("magic", "S4"),
    ("endian", "S1"),
    ("n", "<i4"),
    ("points", "<i8", (2,)),
    ("half_width", "<f8", (2,)),
    ("alpha", "<f8"),
    ("shift", "<f8", (2,)),
])

CSV_MAX_POINTS = 65536


@dataclass(frozen=True, eq=False)
class SpectralState:
    """
    Φ = (φ₁, φ₂) en la grilla periódica. `momentum_shift` guarda b(t): el campo
    físico es e^{ib·x} veces la envolvente almacenada. `alpha` indica qué escala
    K_α^{1/2} se aplicó (None: par Ψ sin escalar).
    """
    grid: SpectralGrid
    phi1: np.ndarray
    phi2: np.ndarray
    alpha: Optional[float] = None
    momentum_shift: Tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.phi1.shape != self.grid.shape or self.phi2.shape != self.grid.shape:
            raise ConstraintError("state", f"componentes con forma {self.grid.shape}")
        if not self.momentum_shift:
            object.__setattr__(self, "momentum_shift", (0.0,) * self.grid.n)

    @classmethod
    def from_spectral(cls, grid: SpectralGrid, hat1: np.ndarray, hat2: np.ndarray,
                      alpha: Optional[float] = None, momentum_shift: Tuple[float, ...] = ()) -> "SpectralState":
        return cls(grid, grid.inverse(hat1), grid.inverse(hat2), alpha, tuple(momentum_shift))

    def spectral(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.grid.forward(self.phi1), self.grid.forward(self.phi2)

    def with_alpha(self, alpha: Optional[float]) -> "SpectralState":
        return replace(self, alpha=alpha)

    @property
    def physical_xi(self) -> np.ndarray:
        """Impulso físico ξ + b asociado a cada punto de la grilla dual."""
        return self.grid.xi_mesh + np.asarray(self.momentum_shift)

    def norm(self) -> float:
        total = np.sum(np.abs(self.phi1) ** 2) + np.sum(np.abs(self.phi2) ** 2)
        return float(math.sqrt(total * self.grid.cell_volume))

    def tail_mass(self) -> float:
        hat1, hat2 = self.spectral()
        dens = np.abs(hat1) ** 2 + np.abs(hat2) ** 2
        total = dens.sum()
        if total == 0:
            return 0.0
        return float(dens[self.grid.outer_mask()].sum() / total)

    def check_aliasing(self) -> None:
        tail = self.tail_mass()
        if tail > settings.ALIAS_TAIL_MAX:
            raise AliasingError(
                f"masa espectral en el cuarto exterior = {tail:.3g} > {settings.ALIAS_TAIL_MAX:g}; "
                f"ampliar grid.points o reducir el soporte inicial"
            )

    def position(self, gauge: bool = False) -> Tuple[np.ndarray, np.ndarray]:
        """Componentes en posición; con gauge=True incluye la fase e^{ib·x}."""
        if not gauge or not any(self.momentum_shift):
            return self.phi1, self.phi2
        hat1, hat2 = self.spectral()
        dens = np.abs(hat1) ** 2 + np.abs(hat2) ** 2
        occupied = dens > settings.SUPPORT_CUTOFF ** 2 * dens.max()
        reach = np.abs(self.physical_xi[occupied]).max(axis=0) if occupied.any() else 0.0
        if np.any(reach > 0.75 * np.asarray(self.grid.xi_max)):
            raise AliasingError(
                f"b(t)={list(self.momentum_shift)} desplaza el espectro fuera de la banda "
                f"representable (|ξ+b| hasta {np.max(reach):.4g}, ξ_max={max(self.grid.xi_max):.4g})"
            )
        phase = np.exp(1j * np.sum(self.grid.x_mesh * np.asarray(self.momentum_shift), axis=-1))
        return phase * self.phi1, phase * self.phi2

    # ---- serialización ----
    def to_binary(self, path: Path) -> None:
        header = np.zeros((), dtype=HEADER_DTYPE)
        header["magic"] = MAGIC
        header["endian"] = b"<"
        header["n"] = self.grid.n
        header["points"][: self.grid.n] = self.grid.points
        header["half_width"][: self.grid.n] = self.grid.half_width
        header["alpha"] = np.nan if self.alpha is None else self.alpha
        header["shift"][: self.grid.n] = self.momentum_shift
        with Path(path).open("wb") as fh:
            fh.write(header.tobytes())
            for comp in (self.phi1, self.phi2):
                fh.write(np.ascontiguousarray(comp, dtype="<c16").tobytes())

    def to_csv(self, path: Path) -> bool:
        """CSV (x..., re1, im1, re2, im2) solo para grillas pequeñas; False si se omite."""
        if self.phi1.size > CSV_MAX_POINTS:
            return False
        x = self.grid.x_mesh.reshape(-1, self.grid.n)
        cols = [x[:, a] for a in range(self.grid.n)]
        for comp in (self.phi1, self.phi2):
            flat = comp.reshape(-1)
            cols += [flat.real, flat.imag]
        names = ["x", "y"][: self.grid.n] + ["re1", "im1", "re2", "im2"]
        np.savetxt(path, np.column_stack(cols), delimiter=",", fmt="%.17g",
                   header=",".join(names), comments="")
        return True


def read_state(path: Path) -> SpectralState:
    raw = Path(path).read_bytes()
    header = np.frombuffer(raw[: HEADER_DTYPE.itemsize], dtype=HEADER_DTYPE)[0]
    if header["magic"] != MAGIC:
        raise ConstraintError("state", f"{path} no es un contenedor KGSS")
    if header["endian"] == b">":
        header = np.frombuffer(raw[: HEADER_DTYPE.itemsize], dtype=HEADER_DTYPE.newbyteorder(">"))[0]
        ctype = ">c16"
    else:
        ctype = "<c16"
    n = int(header["n"])
    grid = SpectralGrid(tuple(float(v) for v in header["half_width"][:n]),
                        tuple(int(v) for v in header["points"][:n]))
    size = int(np.prod(grid.points))
    data = np.frombuffer(raw[HEADER_DTYPE.itemsize:], dtype=ctype)
    phi1 = data[:size].astype(np.complex128).reshape(grid.shape)
    phi2 = data[size: 2 * size].astype(np.complex128).reshape(grid.shape)
    alpha = None if np.isnan(header["alpha"]) else float(header["alpha"])
    return SpectralState(grid, phi1, phi2, alpha, tuple(float(v) for v in header["shift"][:n]))

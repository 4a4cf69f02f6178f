# modes/trajectory.py
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Tuple

import numpy as np

from core.errors import TrajectoryRangeError

CSV_COLUMNS = ("t", "zeta0", "zeta0p", "zeta1", "zeta1p", "A", "B", "C", "D", "G0", "G1", "Q")

# (z0, z0', z1, z1') en un instante
ModeState = Tuple[float, float, float, float]


@dataclass
class ModeTrajectory:
    """
    Serie temporal de un modo ξ: soluciones fundamentales ζ₀, ζ₁ (reales),
    sus derivadas y la representación amplitud–fase (A, B, C, D, 𝒢₀, 𝒢₁).
    B y D se guardan como fases acumuladas (sin reducir módulo 2π).
    """
    xi: np.ndarray
    times: np.ndarray
    zeta0: np.ndarray
    zeta0_prime: np.ndarray
    zeta1: np.ndarray
    zeta1_prime: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    G0: np.ndarray
    G1: np.ndarray
    Q_samples: np.ndarray
    method: str
    nfev: int = 0
    steps: int = 0
    dense: Optional[Callable[[float], ModeState]] = field(default=None, repr=False, compare=False)
    dense_span: Tuple[float, float] = (0.0, 0.0)

    @property
    def wronskian(self) -> np.ndarray:
        return self.zeta0 * self.zeta1_prime - self.zeta0_prime * self.zeta1

    def state_at(self, t: float) -> ModeState:
        """Valores en t: muestra exacta si existe, si no la salida densa del integrador."""
        hit = np.flatnonzero(np.isclose(self.times, t, rtol=0.0, atol=1e-12 * max(1.0, abs(t))))
        if hit.size:
            k = hit[0]
            return (float(self.zeta0[k]), float(self.zeta0_prime[k]),
                    float(self.zeta1[k]), float(self.zeta1_prime[k]))
        lo, hi = self.dense_span
        if self.dense is None or not lo <= t <= hi:
            raise TrajectoryRangeError(
                f"la trayectoria (ξ={self.xi.tolist()}) no cubre t={t:g}; "
                f"muestras en [{self.times[0]:g}, {self.times[-1]:g}]"
            )
        return self.dense(t)

    # ---- CSV para trazas de referencia ----
    def to_csv(self, path: Path) -> None:
        data = np.column_stack([
            self.times, self.zeta0, self.zeta0_prime, self.zeta1, self.zeta1_prime,
            self.A, self.B, self.C, self.D, self.G0, self.G1, self.Q_samples,
        ])
        meta = "# xi=" + ";".join(f"{v:.17g}" for v in self.xi) + f" method={self.method}\n"
        with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
            fh.write(meta)
            np.savetxt(fh, data, delimiter=",", fmt="%.17g", header=",".join(CSV_COLUMNS), comments="")

    @classmethod
    def from_csv(cls, path: Path) -> "ModeTrajectory":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        meta = dict(part.split("=", 1) for part in lines[0].lstrip("# ").split())
        xi = np.array([float(v) for v in meta["xi"].split(";")])
        cols = lines[1].split(",")
        if tuple(cols) != CSV_COLUMNS:
            raise ValueError(f"columnas inesperadas en {path}: {cols}")
        data = np.loadtxt(lines[2:], delimiter=",", ndmin=2)
        return cls(xi, *(data[:, i] for i in range(len(CSV_COLUMNS))), method=meta["method"])

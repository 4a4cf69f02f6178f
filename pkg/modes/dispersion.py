# modes/dispersion.py
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from fields.models import FieldModel
from fields.params import PhysicalParams


@dataclass(frozen=True, eq=False)
class Dispersion:
    """L(t, ξ) = c²|ξ + b(t)|² + (mc²)² y Q = L^{1/2} para un campo dado."""
    params: PhysicalParams
    model: FieldModel

    def L(self, t, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        shifted = xi + self.model.b(t)
        return self.params.c ** 2 * np.sum(shifted ** 2, axis=-1) + self.params.rest_energy ** 2

    def L0(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        return self.params.c ** 2 * np.sum(xi ** 2, axis=-1) + self.params.rest_energy ** 2

    def Q(self, t, xi) -> np.ndarray:
        return np.sqrt(self.L(t, xi))

    def log_derivative(self, t, xi, b=None, b_prime=None) -> np.ndarray:
        """Q'/Q = c²(ξ+b)·b' / L."""
        xi = np.asarray(xi, dtype=float)
        b = self.model.b(t) if b is None else b
        bp = self.model.b_prime(t) if b_prime is None else b_prime
        shifted = xi + b
        L = self.params.c ** 2 * np.sum(shifted ** 2, axis=-1) + self.params.rest_energy ** 2
        with np.errstate(invalid="ignore"):
            num = self.params.c ** 2 * np.sum(np.where(shifted == 0, 0.0, shifted * bp), axis=-1)
        return num / L

    def derivative_bound(self, t) -> np.ndarray:
        """c|b'(t)|/(mc²): cota superior de |Q'/Q|."""
        bp = self.model.b_prime(t)
        return self.params.c * np.linalg.norm(bp, axis=-1) / self.params.rest_energy


def dispersion_eval(disp: Dispersion, t, xi) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    L = disp.L(t, xi)
    return L, np.sqrt(L), disp.log_derivative(t, xi)

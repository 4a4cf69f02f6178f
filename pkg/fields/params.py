# fields/params.py
from __future__ import annotations

import math
from dataclasses import dataclass

from core.errors import ConstraintError


@dataclass(frozen=True)
class PhysicalParams:
    """Constantes físicas de la partícula: c, m, q y dimensión espacial n."""
    c: float = 1.0
    m: float = 1.0
    q: float = 1.0
    n: int = 1

    def __post_init__(self):
        for key in ("c", "m", "q"):
            if not math.isfinite(getattr(self, key)):
                raise ConstraintError(f"params.{key}", f"params.{key} finito")
        if self.m <= 0:
            raise ConstraintError("params.m", "params.m > 0")
        if self.c <= 0:
            raise ConstraintError("params.c", "params.c > 0")
        if self.q == 0:
            raise ConstraintError("params.q", "params.q != 0")
        if self.n not in (1, 2):
            raise ConstraintError("params.n", "params.n in {1, 2}")

    # (mc²): cota inferior de Q(t, ξ)
    @property
    def rest_energy(self) -> float:
        return self.m * self.c ** 2

# propagator/trace.py
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from core.errors import InvariantViolation


@dataclass
class NormTrace:
    """Series temporales de métricas con nombre, más metadatos de la corrida."""
    label: str
    times: np.ndarray
    values: Dict[str, np.ndarray] = field(default_factory=dict)
    metadata: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise InvariantViolation(f"{self.label}: tiempos no estrictamente crecientes")
        for name, series in list(self.values.items()):
            self.add(name, series)

    def add(self, name: str, series) -> None:
        series = np.asarray(series, dtype=float)
        if series.shape != self.times.shape:
            raise InvariantViolation(f"{self.label}.{name}: {series.shape} != {self.times.shape}")
        if not np.all(np.isfinite(series)):
            raise InvariantViolation(f"{self.label}.{name}: valores no finitos")
        self.values[name] = series

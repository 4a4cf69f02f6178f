# harness/fits.py
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Tuple

import numpy as np

from core.errors import FitError

MIN_FIT_SAMPLES = 8


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r_squared: float
    window: Tuple[float, float]
    samples: int

    def to_dict(self) -> dict:
        return asdict(self)


def fit_window(times: np.ndarray, decades: float) -> np.ndarray:
    """Máscara de las últimas `decades` décadas de tiempos muestreados."""
    times = np.asarray(times, dtype=float)
    return times >= times[-1] / 10.0 ** decades


def fit_slope(x, y, times, decades: float, min_samples: int = MIN_FIT_SAMPLES) -> SlopeFit:
    """Mínimos cuadrados y = slope·x + intercept sobre la ventana final en t."""
    x, y, times = (np.asarray(v, dtype=float) for v in (x, y, times))
    mask = fit_window(times, decades) & np.isfinite(x) & np.isfinite(y)
    count = int(mask.sum())
    if count < max(min_samples, MIN_FIT_SAMPLES):
        raise FitError(f"ventana de ajuste con {count} muestras (mínimo {max(min_samples, MIN_FIT_SAMPLES)})")
    xs, ys = x[mask], y[mask]
    if np.ptp(xs) == 0:
        raise FitError("abscisa constante en la ventana de ajuste")
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - float(np.sum(resid ** 2)) / ss_tot)
    window = (float(times[mask][0]), float(times[mask][-1]))
    return SlopeFit(float(slope), float(intercept), r2, window, count)


def log_drift(times, values, decades: float = 1.0) -> float:
    """|pendiente| de log(values) contra log10(t) en la última década: deriva por década."""
    times, values = np.asarray(times, dtype=float), np.asarray(values, dtype=float)
    mask = fit_window(times, decades)
    if mask.sum() < 2:
        return 0.0
    slope, _ = np.polyfit(np.log10(times[mask]), np.log(values[mask]), 1)
    return float(abs(slope))

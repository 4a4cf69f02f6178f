# fields/models.py
"""
Catálogo de campos eléctricos homogéneos E(t) con primitivas exactas.

Todos los modelos trabajan con el impulso acumulado b(t) = ∫₀ᵗ qE(s) ds:
las formas cerradas se declaran directamente sobre b (como en el catálogo
de leyes de potencia y logarítmicas), y E = b'/q. El modelo tabulado se
declara sobre E y obtiene b por cuadratura.

El dominio temporal es t ≥ 0. Las evaluaciones aceptan escalares o arreglos
y devuelven forma t.shape + (dim,).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator, make_interp_spline

from core.config import settings
from core.errors import ConfigParseError, ConstraintError, FieldRangeError
from fields.params import PhysicalParams

logger = logging.getLogger(__name__)

KINDS = ("constant", "power_law", "logarithmic", "sinusoidal", "tabulated")


def _unit(dim: int, axis: int) -> np.ndarray:
    v = np.zeros(dim)
    v[axis] = 1.0
    return v


def _check_axis(axis: int, dim: int) -> None:
    if not 0 <= axis < dim:
        raise ConstraintError("field.axis", f"0 <= field.axis < params.n ({dim})")


def _check_finite(key: str, value: float) -> None:
    if not math.isfinite(value):
        raise ConstraintError(key, f"{key} finito")


class FieldModel:
    """Interfaz común. Las subclases son inmutables y seguras entre hilos/procesos."""

    kind: str = ""
    q: float
    dim: int

    def b(self, t) -> np.ndarray:
        raise NotImplementedError

    def b_prime(self, t) -> np.ndarray:
        raise NotImplementedError

    def b_second(self, t) -> np.ndarray:
        raise NotImplementedError

    def field(self, t) -> np.ndarray:
        return self.b_prime(t) / self.q

    def field_prime(self, t) -> np.ndarray:
        return self.b_second(t) / self.q

    # Exponente p si b'(0) es infinito (ley de potencia pura con γ < 1);
    # en ese caso el reloj s = t^p regulariza las ecuaciones de amplitud–fase.
    @property
    def origin_exponent(self) -> Optional[float]:
        return None

    def b_prime_clock(self, s, p: float) -> np.ndarray:
        """db/ds con t = s^(1/p)."""
        s = np.asarray(s, dtype=float)
        t = s ** (1.0 / p)
        tau = (1.0 / p) * s ** (1.0 / p - 1.0)
        return self.b_prime(t) * tau[..., None]

    @property
    def is_zero(self) -> bool:
        return False

    @property
    def period(self) -> Optional[float]:
        return None

    @property
    def t_max(self) -> float:
        return math.inf

    def analytic_bounds(self, t_lo: float, t_hi: float) -> Optional[Tuple[float, float]]:
        return None

    def describe(self) -> Dict:
        return {"kind": self.kind}


# ---- Formas cerradas: términos de potencia + parte regular ----

@dataclass(frozen=True)
class ClosedFormField(FieldModel):
    q: float = 1.0
    dim: int = 1

    def _power_terms(self) -> List[Tuple[np.ndarray, float]]:
        """Lista (vector, e): contribución vector·[(t+t₀)^e − t₀^e] a b(t)."""
        return []

    @property
    def onset(self) -> float:
        return 0.0

    def _regular(self, t: np.ndarray, order: int) -> np.ndarray:
        return np.zeros(t.shape + (self.dim,))

    def _power(self, t: np.ndarray, order: int) -> np.ndarray:
        out = np.zeros(t.shape + (self.dim,))
        t0 = self.onset
        with np.errstate(divide="ignore", invalid="ignore"):
            for vec, e in self._power_terms():
                if order == 0:
                    val = (t + t0) ** e - t0 ** e
                elif order == 1:
                    val = e * (t + t0) ** (e - 1.0)
                else:
                    if e == 1.0:
                        continue
                    val = e * (e - 1.0) * (t + t0) ** (e - 2.0)
                out += val[..., None] * vec
        return out

    def b(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self._power(t, 0) + self._regular(t, 0)

    def b_prime(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self._power(t, 1) + self._regular(t, 1)

    def b_second(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self._power(t, 2) + self._regular(t, 2)

    @property
    def origin_exponent(self) -> Optional[float]:
        if self.onset > 0:
            return None
        singular = [e for _, e in self._power_terms() if e < 1.0]
        return min(singular) if singular else None

    def b_prime_clock(self, s, p: float) -> np.ndarray:
        if self.onset > 0:
            return super().b_prime_clock(s, p)
        s = np.asarray(s, dtype=float)
        t = s ** (1.0 / p)
        tau = (1.0 / p) * s ** (1.0 / p - 1.0)
        out = self._regular(t, 1) * tau[..., None]
        for vec, e in self._power_terms():
            out += ((e / p) * s ** (e / p - 1.0))[..., None] * vec
        return out


@dataclass(frozen=True)
class ConstantField(ClosedFormField):
    E0: Tuple[float, ...] = (1.0,)
    kind: str = field(default="constant", init=False)

    def __post_init__(self):
        if len(self.E0) != self.dim:
            raise ConstraintError("field.E0", f"len(field.E0) == params.n ({self.dim})")
        for v in self.E0:
            _check_finite("field.E0", v)

    def _power_terms(self):
        if self.is_zero:
            return []
        return [(self.q * np.asarray(self.E0, dtype=float), 1.0)]

    def field(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(np.asarray(self.E0, dtype=float), t.shape + (self.dim,)).copy()

    @property
    def is_zero(self) -> bool:
        return all(v == 0 for v in self.E0)

    def analytic_bounds(self, t_lo, t_hi):
        return float(np.sum(np.abs(self.E0))), 0.0

    def describe(self):
        return {"kind": self.kind, "E0": list(self.E0)}


@dataclass(frozen=True)
class PowerLawField(ClosedFormField):
    """b = C_γ[(t+t₀)^γ − t₀^γ] + Σ r_k log(1+t)^k + Σ a sin(ωt) sobre un eje."""
    gamma: float = 0.5
    coefficient: float = 1.0
    axis: int = 0
    rho: Tuple[float, ...] = ()
    theta1: Tuple[Tuple[float, float], ...] = ()
    t0: float = 0.0
    kind: str = field(default="power_law", init=False)

    def __post_init__(self):
        _check_finite("field.gamma", self.gamma)
        if not 0 < self.gamma <= 1:
            raise ConstraintError("field.gamma", "0 < field.gamma <= 1")
        if self.coefficient == 0 or not math.isfinite(self.coefficient):
            raise ConstraintError("field.coefficient", "field.coefficient != 0")
        _check_axis(self.axis, self.dim)
        if self.t0 < 0:
            raise ConstraintError("field.onset", "field.onset >= 0")
        for r in self.rho:
            _check_finite("field.rho", r)
        if self.theta1 and self.gamma != 1:
            raise ConstraintError("field.theta1", "field.theta1 solo con field.gamma = 1")
        for amp, omega in self.theta1:
            _check_finite("field.theta1", amp)
            if not omega > 0:
                raise ConstraintError("field.theta1", "frecuencia de field.theta1 > 0")

    @property
    def onset(self) -> float:
        return self.t0

    def _power_terms(self):
        return [(self.coefficient * _unit(self.dim, self.axis), self.gamma)]

    def _regular(self, t, order):
        out = np.zeros(t.shape + (self.dim,))
        if not self.rho and not self.theta1:
            return out
        ell = np.log1p(t)
        acc = np.zeros(t.shape)
        for k, r in enumerate(self.rho, start=1):
            if order == 0:
                acc += r * ell ** k
            elif order == 1:
                acc += k * r * ell ** (k - 1) / (1.0 + t)
            else:
                lower = (k - 1) * ell ** (k - 2) if k > 1 else 0.0
                acc += k * r * (lower - ell ** (k - 1)) / (1.0 + t) ** 2
        for amp, omega in self.theta1:
            if order == 0:
                acc += amp * np.sin(omega * t)
            elif order == 1:
                acc += amp * omega * np.cos(omega * t)
            else:
                acc -= amp * omega ** 2 * np.sin(omega * t)
        out[..., self.axis] = acc
        return out

    @property
    def period(self):
        if not self.theta1:
            return None
        return 2 * math.pi / max(omega for _, omega in self.theta1)

    def analytic_bounds(self, t_lo, t_hi):
        if self.rho or self.theta1:
            return None
        g, C, aq = self.gamma, abs(self.coefficient), abs(self.q)
        base = t_lo + self.t0
        with np.errstate(divide="ignore"):
            e00 = C * g * np.float64(base) ** (g - 1.0) / aq if g < 1 else C / aq
            e01 = C * g * (1 - g) * np.float64(base) ** (g - 2.0) / aq if g < 1 else 0.0
        return float(e00), float(e01)

    def describe(self):
        return {
            "kind": self.kind, "gamma": self.gamma, "coefficient": self.coefficient,
            "axis": self.axis, "rho": list(self.rho),
            "theta1": [list(p) for p in self.theta1], "onset": self.t0,
        }


@dataclass(frozen=True)
class LogarithmicField(ClosedFormField):
    """b = e₃ log(1 + e₄ t) sobre un eje."""
    e3: float = 1.0
    e4: float = 1.0
    axis: int = 0
    kind: str = field(default="logarithmic", init=False)

    def __post_init__(self):
        if self.e3 == 0 or not math.isfinite(self.e3):
            raise ConstraintError("field.e3", "field.e3 != 0")
        if not (self.e4 > 0 and math.isfinite(self.e4)):
            raise ConstraintError("field.e4", "field.e4 > 0")
        _check_axis(self.axis, self.dim)

    def _regular(self, t, order):
        out = np.zeros(t.shape + (self.dim,))
        u = 1.0 + self.e4 * t
        if order == 0:
            out[..., self.axis] = self.e3 * np.log1p(self.e4 * t)
        elif order == 1:
            out[..., self.axis] = self.e3 * self.e4 / u
        else:
            out[..., self.axis] = -self.e3 * self.e4 ** 2 / u ** 2
        return out

    def analytic_bounds(self, t_lo, t_hi):
        u = 1.0 + self.e4 * t_lo
        aq = abs(self.q)
        return abs(self.e3) * self.e4 / (aq * u), abs(self.e3) * self.e4 ** 2 / (aq * u ** 2)

    def describe(self):
        return {"kind": self.kind, "e3": self.e3, "e4": self.e4, "axis": self.axis}


@dataclass(frozen=True)
class SinusoidalField(ClosedFormField):
    """
    Caso de prueba negativo (campo AC).
    n=1: b = C t^γ + A(cos ωt − 1)
    n=2: b₁ = C t^γ, b₂ = t^{γ/2} + A(cos ωt − 1)
    """
    gamma: float = 0.5
    coefficient: float = 1.0
    amplitude: float = 1.0
    frequency: float = 1.0
    t0: float = 0.0
    kind: str = field(default="sinusoidal", init=False)

    def __post_init__(self):
        _check_finite("field.gamma", self.gamma)
        if not 0 < self.gamma <= 1:
            raise ConstraintError("field.gamma", "0 < field.gamma <= 1")
        if self.coefficient == 0 or not math.isfinite(self.coefficient):
            raise ConstraintError("field.coefficient", "field.coefficient != 0")
        _check_finite("field.amplitude", self.amplitude)
        if not (self.frequency > 0 and math.isfinite(self.frequency)):
            raise ConstraintError("field.frequency", "field.frequency > 0")
        if self.t0 < 0:
            raise ConstraintError("field.onset", "field.onset >= 0")

    @property
    def onset(self) -> float:
        return self.t0

    @property
    def _ac_axis(self) -> int:
        return self.dim - 1

    def _power_terms(self):
        terms = [(self.coefficient * _unit(self.dim, 0), self.gamma)]
        if self.dim == 2:
            terms.append((_unit(2, 1), self.gamma / 2))
        return terms

    def _regular(self, t, order):
        out = np.zeros(t.shape + (self.dim,))
        A, w = self.amplitude, self.frequency
        if order == 0:
            out[..., self._ac_axis] = A * (np.cos(w * t) - 1.0)
        elif order == 1:
            out[..., self._ac_axis] = -A * w * np.sin(w * t)
        else:
            out[..., self._ac_axis] = -A * w ** 2 * np.cos(w * t)
        return out

    @property
    def period(self):
        return 2 * math.pi / self.frequency

    def describe(self):
        return {
            "kind": self.kind, "gamma": self.gamma, "coefficient": self.coefficient,
            "amplitude": self.amplitude, "frequency": self.frequency, "onset": self.t0,
        }


# ---- Campo tabulado ----

@dataclass(frozen=True, eq=False)
class TabulatedField(FieldModel):
    """
    E(t) muestreado. Orden 3: cúbica monótona (PCHIP, C¹); orden 5: spline quíntico.
    b se obtiene por cuadratura adaptativa del interpolante, con las integrales
    entre nodos calculadas una sola vez al construir (caché inmutable).
    """
    times: np.ndarray = None
    values: np.ndarray = None
    order: int = 3
    q: float = 1.0
    dim: int = 1
    kind: str = field(default="tabulated", init=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        E = np.asarray(self.values, dtype=float)
        if E.ndim == 1:
            E = E[:, None]
        if E.shape[1] != self.dim:
            raise ConstraintError("field.samples", f"columnas de E == params.n ({self.dim})")
        if self.order not in (3, 5):
            raise ConstraintError("field.order", "field.order in {3, 5}")
        if t.size < self.order + 1 or t.size != E.shape[0]:
            raise ConstraintError("field.samples", f"al menos {self.order + 1} muestras (t, E)")
        if t[0] != 0.0:
            raise ConstraintError("field.samples", "la primera muestra debe tener t = 0")
        if not np.all(np.diff(t) > 0):
            raise ConstraintError("field.samples", "t estrictamente creciente")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(E))):
            raise ConstraintError("field.samples", "muestras finitas")

        if self.order == 3:
            interp = PchipInterpolator(t, E, axis=0, extrapolate=False)
        else:
            interp = make_interp_spline(t, E, k=5, axis=0)

        # 1) integrales nodo a nodo, acumuladas
        cum = np.zeros_like(E)
        for i in range(1, t.size):
            seg = [
                quad(lambda s, j=j: float(interp(s)[j]), t[i - 1], t[i],
                     epsrel=settings.QUAD_EPSREL, epsabs=0.0, limit=settings.QUAD_LIMIT)[0]
                for j in range(self.dim)
            ]
            cum[i] = cum[i - 1] + np.asarray(seg)

        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", E)
        object.__setattr__(self, "_interp", interp)
        object.__setattr__(self, "_cum", cum)

    @property
    def t_max(self) -> float:
        return float(self.times[-1])

    def _check_range(self, t: np.ndarray) -> None:
        tol = 1e-12 * max(1.0, self.t_max)
        if t.size and (t.min() < -tol or t.max() > self.t_max + tol):
            raise FieldRangeError(
                f"t fuera del rango tabulado [0, {self.t_max:g}]: "
                f"[{t.min():g}, {t.max():g}]"
            )

    def field(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        self._check_range(t)
        tc = np.clip(t, 0.0, self.t_max)
        return np.asarray(self._interp(tc)).reshape(t.shape + (self.dim,))

    def b(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        self._check_range(t)
        flat = np.clip(t.ravel(), 0.0, self.t_max)
        out = np.empty((flat.size, self.dim))
        for n, tk in enumerate(flat):
            i = max(0, int(np.searchsorted(self.times, tk, side="right")) - 1)
            i = min(i, self.times.size - 1)
            part = [
                quad(lambda s, j=j: float(self._interp(s)[j]), self.times[i], tk,
                     epsrel=settings.QUAD_EPSREL, epsabs=0.0, limit=settings.QUAD_LIMIT)[0]
                if tk > self.times[i] else 0.0
                for j in range(self.dim)
            ]
            out[n] = self._cum[i] + np.asarray(part)
        return self.q * out.reshape(t.shape + (self.dim,))

    def b_prime(self, t) -> np.ndarray:
        return self.q * self.field(t)

    def b_second(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        self._check_range(t)
        h = 1e-6 * np.maximum(1.0, np.abs(t))
        lo = np.clip(t - h, 0.0, self.t_max)
        hi = np.clip(t + h, 0.0, self.t_max)
        dE = (self.field(hi) - self.field(lo)) / (hi - lo)[..., None]
        return self.q * dE

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self.values == 0))

    def describe(self):
        return {"kind": self.kind, "order": self.order, "samples": int(self.times.size),
                "t_max": self.t_max}


def load_tabulated_csv(path: Path, dim: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """CSV con columnas t,E (o t,E1,E2). Una fila de encabezado es opcional."""
    path = Path(path)
    if not path.exists():
        raise ConstraintError("field.path", f"field.path existe ({path})")
    try:
        with path.open(encoding="utf-8") as fh:
            first = fh.readline()
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigParseError(f"no se pudo leer {path}: {exc}") from exc
    try:
        [float(x) for x in first.split(",")]
        skip = 0
    except ValueError:
        skip = 1
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
    except ValueError as exc:
        raise ConfigParseError(f"CSV mal formado en {path.name}: {exc}") from exc
    if data.size == 0 or data.shape[1] != dim + 1:
        raise ConstraintError("field.path", f"{dim + 1} columnas en {path.name}")
    return data[:, 0], data[:, 1:]


def build_field(kind: str, params: PhysicalParams, **kwargs) -> FieldModel:
    """Construye el modelo del catálogo; valida parámetros al construir."""
    common = {"q": params.q, "dim": params.n}
    if kind == "constant":
        E0 = kwargs.get("E0")
        if E0 is None:
            E0 = (1.0,) * params.n
        return ConstantField(E0=tuple(float(v) for v in E0), **common)
    if kind == "power_law":
        return PowerLawField(
            gamma=kwargs.get("gamma", 0.5),
            coefficient=kwargs.get("coefficient", 1.0),
            axis=kwargs.get("axis", 0),
            rho=tuple(kwargs.get("rho", ())),
            theta1=tuple(tuple(p) for p in kwargs.get("theta1", ())),
            t0=kwargs.get("onset", 0.0),
            **common,
        )
    if kind == "logarithmic":
        return LogarithmicField(e3=kwargs.get("e3", 1.0), e4=kwargs.get("e4", 1.0),
                                axis=kwargs.get("axis", 0), **common)
    if kind == "sinusoidal":
        return SinusoidalField(
            gamma=kwargs.get("gamma", 0.5),
            coefficient=kwargs.get("coefficient", 1.0),
            amplitude=kwargs.get("amplitude", 1.0),
            frequency=kwargs.get("frequency", 1.0),
            t0=kwargs.get("onset", 0.0),
            **common,
        )
    if kind == "tabulated":
        return TabulatedField(times=kwargs["times"], values=kwargs["values"],
                              order=kwargs.get("order", 3), **common)
    raise ConstraintError("field.kind", f"field.kind in {KINDS}")


# ---- Operaciones públicas ----

def eval_field(model: FieldModel, t) -> np.ndarray:
    return model.field(t)


def eval_b(model: FieldModel, t) -> np.ndarray:
    return model.b(t)


def eval_b_prime(model: FieldModel, t) -> np.ndarray:
    return model.b_prime(t)


def eval_b_second(model: FieldModel, t) -> np.ndarray:
    return model.b_second(t)


def field_bounds(model: FieldModel, t_lo: float, t_hi: float) -> Tuple[float, float]:
    """
    Estimaciones (E₀,₀, E₀,₁) = sup Σ_j |E_j^{(k)}| en [t_lo, t_hi].
    Forma analítica cuando existe; si no, muestreo denso.
    """
    exact = model.analytic_bounds(t_lo, t_hi)
    if exact is not None:
        return exact
    t_hi = min(t_hi, model.t_max)
    n_pts = 4097
    if model.period:
        n_pts = max(n_pts, int(16 * (t_hi - t_lo) / model.period) + 1)
    pts = np.linspace(t_lo, t_hi, n_pts)
    if t_lo > 0:
        pts = np.union1d(pts, np.geomspace(t_lo, t_hi, 1025))
    E = model.field(pts)
    dE = model.field_prime(pts)
    e00 = float(np.max(np.sum(np.abs(E), axis=-1)))
    e01 = float(np.max(np.sum(np.abs(dE), axis=-1)))
    logger.debug("cotas muestreadas en [%g, %g]: E00=%g E01=%g", t_lo, t_hi, e00, e01)
    return e00, e01

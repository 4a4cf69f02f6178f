# modes/solvers.py
"""
Integración de ζ'' + L(t, ξ) ζ = 0 por dos rutas independientes:

  direct           sistema de primer orden para (ζ₀, ζ₀', ζ₁, ζ₁')
  amplitude_phase  ecuaciones de Hochstadt para (log A, B, log C, D)

Ambas rutas resuelven un lote de K modos en una sola llamada a solve_ivp
(tolerancia tol/√K para que cada modo conserve su presupuesto), por tramos
de ancho max(1, 0.1 t) con techo de paso STEP_CEILING / max Q en el tramo.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from core.config import settings
from core.errors import ConstraintError, SolverError
from modes.dispersion import Dispersion
from modes.trajectory import ModeTrajectory

logger = logging.getLogger(__name__)

ROUTES = ("direct", "amplitude_phase")
TWO_PI_LD = np.longdouble("6.28318530717958647692528676655900577")
TOL_RANGE = (1e-13, 1e-4)


def phase_trig(phase) -> Tuple[np.ndarray, np.ndarray]:
    """sin y cos de una fase acumulada, reducida módulo 2π en precisión extendida."""
    reduced = np.fmod(np.asarray(phase, dtype=np.longdouble), TWO_PI_LD).astype(np.float64)
    return np.sin(reduced), np.cos(reduced)


def chunk_edges(t_end: float) -> np.ndarray:
    edges = [0.0]
    t = 0.0
    while t < t_end:
        t = min(t + max(1.0, 0.1 * t), t_end)
        edges.append(t)
    return np.asarray(edges)


@dataclass
class ModeBatch:
    """Resultado de un lote: arreglos (T, K) evaluados en `times` (times[0] = 0)."""
    xis: np.ndarray
    times: np.ndarray
    zeta0: np.ndarray
    zeta0_prime: np.ndarray
    zeta1: np.ndarray
    zeta1_prime: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    Q: np.ndarray
    Q0: np.ndarray
    route: str
    nfev: int = 0
    dense: List[Tuple[float, float, object, Optional[float]]] = field(default_factory=list, repr=False)

    @property
    def steps(self) -> int:
        return int(self.nfev // max(1, settings.SOLVER_STAGES))

    @property
    def G0(self) -> np.ndarray:
        return self.A * np.sqrt(self.Q / self.Q0)

    @property
    def G1(self) -> np.ndarray:
        return self.C * np.sqrt(self.Q * self.Q0)

    def trajectory(self, k: int) -> ModeTrajectory:
        return ModeTrajectory(
            xi=self.xis[k].copy(), times=self.times.copy(),
            zeta0=self.zeta0[:, k], zeta0_prime=self.zeta0_prime[:, k],
            zeta1=self.zeta1[:, k], zeta1_prime=self.zeta1_prime[:, k],
            A=self.A[:, k], B=self.B[:, k], C=self.C[:, k], D=self.D[:, k],
            G0=self.G0[:, k], G1=self.G1[:, k], Q_samples=self.Q[:, k],
            method=self.route, nfev=self.nfev, steps=self.steps,
        )


def _validate(times: np.ndarray, tol: float) -> None:
    if not TOL_RANGE[0] <= tol <= TOL_RANGE[1]:
        raise ConstraintError("tolerances.mode", "1e-13 <= tolerances.mode <= 1e-4")
    if times[-1] <= 0:
        raise ConstraintError("t_end", "t_end > 0")
    if np.any(np.diff(times) <= 0) or times[0] < 0:
        raise ConstraintError("times", "tiempos de muestreo crecientes y >= 0")


def sample_grid(times) -> np.ndarray:
    times = np.asarray(times, dtype=float).reshape(-1)
    if times.size == 0 or times[0] != 0.0:
        times = np.concatenate([[0.0], times])
    return times


def _run_chunks(rhs_t, rhs_s, y0, times, edges, qmax_t, qmax_s, clock_p, rtol, atol, method, dense):
    """Avanza tramo a tramo; el primer tramo usa el reloj s = t^p si clock_p no es None."""
    out = np.empty((times.size, y0.size))
    out[0] = y0
    y = y0
    nfev = 0
    segments = []
    for a, b in zip(edges[:-1], edges[1:]):
        idx = np.flatnonzero((times > a) & (times <= b))
        use_clock = clock_p is not None and a == 0.0
        if use_clock:
            span = (0.0, b ** clock_p)
            te = np.unique(np.concatenate([times[idx] ** clock_p, [span[1]]]))
            rhs, qmax = rhs_s, qmax_s(*span)
        else:
            span = (a, b)
            te = np.unique(np.concatenate([times[idx], [b]]))
            rhs, qmax = rhs_t, qmax_t(a, b)
        sol = solve_ivp(rhs, span, y, method=method, t_eval=te, rtol=rtol, atol=atol,
                        max_step=settings.STEP_CEILING / qmax, dense_output=dense)
        nfev += sol.nfev
        if sol.status != 0:
            reached = sol.t[-1] if sol.t.size else span[0]
            if use_clock:
                reached = reached ** (1.0 / clock_p)
            raise SolverError(f"integración fallida: {sol.message}", reached=float(reached))
        pos = np.searchsorted(te, times[idx] ** clock_p if use_clock else times[idx])
        out[idx] = sol.y[:, pos].T
        y = sol.y[:, -1]
        if dense:
            segments.append((a, b, sol.sol, clock_p if use_clock else None))
    return out, nfev, segments


def _qmax_probe(disp: Dispersion, xis: np.ndarray):
    def qmax(a, b):
        probe = np.linspace(a, b, 17)
        bt = disp.model.b(probe)  # (P, n)
        shifted = xis[None, :, :] + bt[:, None, :]
        L = disp.params.c ** 2 * np.sum(shifted ** 2, axis=-1) + disp.params.rest_energy ** 2
        return float(np.sqrt(L.max()))
    return qmax


def _L_samples(disp: Dispersion, xis: np.ndarray, times: np.ndarray) -> np.ndarray:
    bt = disp.model.b(times)
    shifted = xis[None, :, :] + bt[:, None, :]
    return disp.params.c ** 2 * np.sum(shifted ** 2, axis=-1) + disp.params.rest_energy ** 2


def _unwrap_near(wrapped: np.ndarray, guide: np.ndarray) -> np.ndarray:
    """Elige, muestra a muestra, la rama 2πk más cercana a la fase previa + ΔΘ."""
    out = np.empty_like(wrapped)
    out[0] = wrapped[0]
    two_pi = 2.0 * math.pi
    for k in range(1, wrapped.shape[0]):
        target = out[k - 1] + (guide[k] - guide[k - 1])
        out[k] = wrapped[k] + two_pi * np.round((target - wrapped[k]) / two_pi)
    return out


def solve_batch(disp: Dispersion, xis, times, tol: Optional[float] = None,
                route: Optional[str] = None, method: Optional[str] = None,
                dense: bool = False) -> ModeBatch:
    """Resuelve K modos a la vez y devuelve un ModeBatch en los tiempos pedidos (con t=0)."""
    tol = settings.MODE_TOL if tol is None else tol
    route = route or settings.MODE_ROUTE
    method = method or settings.MODE_SOLVER_METHOD
    if route not in ROUTES:
        raise ConstraintError("route", f"route in {ROUTES}")
    xis = np.asarray(xis, dtype=float).reshape(-1, disp.params.n)
    times = sample_grid(times)
    _validate(times, tol)

    K = xis.shape[0]
    rtol = atol = tol / math.sqrt(K)
    edges = chunk_edges(float(times[-1]))
    c2 = disp.params.c ** 2
    mc2sq = disp.params.rest_energy ** 2
    model = disp.model
    L0 = disp.L0(xis)
    Q0 = np.sqrt(L0)
    qmax_t = _qmax_probe(disp, xis)

    if route == "direct":
        def rhs(t, y):
            shifted = xis + model.b(t)
            L = c2 * np.sum(shifted ** 2, axis=-1) + mc2sq
            return np.concatenate([y[K:2 * K], -L * y[:K], y[3 * K:4 * K], -L * y[2 * K:3 * K], np.sqrt(L)])

        y0 = np.concatenate([np.ones(K), np.zeros(K), np.zeros(K), np.ones(K), np.zeros(K)])
        raw, nfev, segments = _run_chunks(rhs, None, y0, times, edges, qmax_t, None, None,
                                          rtol, atol, method, dense)
        z0, z0p, z1, z1p, theta = (raw[:, i * K:(i + 1) * K] for i in range(5))
        Q = np.sqrt(_L_samples(disp, xis, times))
        A = np.hypot(z0, z0p / Q)
        C = np.hypot(z1, z1p / Q)
        B = _unwrap_near(np.arctan2(-z0p / Q, z0), theta)
        D = _unwrap_near(np.arctan2(z1, z1p / Q), theta)
    else:
        def trig_bd(y):
            sB, cB = phase_trig(y[K:2 * K])
            sD, cD = phase_trig(y[3 * K:4 * K])
            return sB, cB, sD, cD

        def rhs(t, y):
            b = model.b(t)
            bp = model.b_prime(t)
            shifted = xis + b
            L = c2 * np.sum(shifted ** 2, axis=-1) + mc2sq
            Qv = np.sqrt(L)
            g = c2 * np.sum(shifted * bp, axis=-1) / L
            sB, cB, sD, cD = trig_bd(y)
            return np.concatenate([-g * sB ** 2, Qv - g * sB * cB, -g * cD ** 2, Qv + g * sD * cD])

        p = model.origin_exponent
        rhs_s = qmax_s = None
        if p is not None:
            def rhs_s(s, y):
                t = s ** (1.0 / p)
                tau = (1.0 / p) * s ** (1.0 / p - 1.0)
                b = model.b(t)
                bs = model.b_prime_clock(s, p)
                shifted = xis + b
                L = c2 * np.sum(shifted ** 2, axis=-1) + mc2sq
                Qv = np.sqrt(L)
                g = c2 * np.sum(shifted * bs, axis=-1) / L
                sB, cB, sD, cD = trig_bd(y)
                return np.concatenate([-g * sB ** 2, Qv * tau - g * sB * cB,
                                       -g * cD ** 2, Qv * tau + g * sD * cD])

            def qmax_s(s_lo, s_hi):
                probe = np.linspace(s_lo, s_hi, 17)
                t = probe ** (1.0 / p)
                tau = (1.0 / p) * probe ** (1.0 / p - 1.0)
                L = _L_samples(disp, xis, t)
                return float(max(np.max(np.sqrt(L) * tau[:, None]), 1e-12))

        y0 = np.concatenate([np.zeros(K), np.zeros(K), -np.log(Q0), np.zeros(K)])
        raw, nfev, segments = _run_chunks(rhs, rhs_s, y0, times, edges, qmax_t, qmax_s, p,
                                          rtol, atol, method, dense)
        lnA, B, lnC, D = (raw[:, i * K:(i + 1) * K] for i in range(4))
        Q = np.sqrt(_L_samples(disp, xis, times))
        A, C = np.exp(lnA), np.exp(lnC)
        sB, cB = phase_trig(B)
        sD, cD = phase_trig(D)
        z0, z0p = A * cB, -A * Q * sB
        z1, z1p = C * sD, C * Q * cD

    logger.debug("lote %s: K=%d t_end=%g nfev=%d", route, K, times[-1], nfev)
    return ModeBatch(
        xis=xis, times=times, zeta0=z0, zeta0_prime=z0p, zeta1=z1, zeta1_prime=z1p,
        A=A, B=B, C=C, D=D, Q=Q, Q0=Q0, route=route, nfev=nfev, dense=segments,
    )


def _dense_evaluator(disp: Dispersion, xi: np.ndarray, route: str, segments) -> Callable:
    def evaluate(t: float):
        for a, b, sol, p in segments:
            if a <= t <= b:
                y = sol(t ** p if p is not None else t)
                break
        else:
            raise ValueError(f"t={t} fuera de la salida densa")
        if route == "direct":
            return float(y[0]), float(y[1]), float(y[2]), float(y[3])
        Qt = float(disp.Q(t, xi))
        sB, cB = phase_trig(y[1])
        sD, cD = phase_trig(y[3])
        A, C = math.exp(y[0]), math.exp(y[2])
        return float(A * cB), float(-A * Qt * sB), float(C * sD), float(C * Qt * cD)
    return evaluate


def _integrate(disp: Dispersion, xi, t_end: float, tol: float, route: str, times) -> ModeTrajectory:
    if not t_end > 0:
        raise ConstraintError("t_end", "t_end > 0")
    grid = np.linspace(0.0, t_end, 101) if times is None else np.asarray(times, dtype=float)
    grid = grid[grid <= t_end]
    if grid.size == 0 or grid[-1] != t_end:
        grid = np.append(grid, t_end)
    batch = solve_batch(disp, np.asarray(xi, dtype=float), grid, tol=tol, route=route, dense=True)
    traj = batch.trajectory(0)
    traj.dense = _dense_evaluator(disp, batch.xis[0], route, batch.dense)
    traj.dense_span = (0.0, float(t_end))
    return traj


def integrate_direct(disp: Dispersion, xi, t_end: float, tol: float,
                     times: Optional[Sequence[float]] = None) -> ModeTrajectory:
    """Ruta directa; A, B, C, D se reconstruyen desde ζ (B, D con continuación de rama)."""
    return _integrate(disp, xi, t_end, tol, "direct", times)


def integrate_amplitude_phase(disp: Dispersion, xi, t_end: float, tol: float,
                              times: Optional[Sequence[float]] = None) -> ModeTrajectory:
    """Ruta de Hochstadt: (log A, B, log C, D); ζ se reconstruye a partir de ellos."""
    return _integrate(disp, xi, t_end, tol, "amplitude_phase", times)

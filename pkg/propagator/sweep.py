# propagator/sweep.py
"""
Barrido de modos sobre la grilla dual. Los modos se reparten en lotes de
tamaño fijo (MODE_CHUNK), independientes del número de workers, y se
concatenan en orden: el resultado es idéntico para cualquier --workers.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from core.config import settings
from modes.dispersion import Dispersion
from modes.solvers import ModeBatch, sample_grid, solve_batch

logger = logging.getLogger(__name__)


def _solve_chunk(args) -> Tuple[ModeBatch, float]:
    disp, xis, times, tol, route = args
    t0 = time.perf_counter()
    batch = solve_batch(disp, xis, times, tol=tol, route=route)
    return batch, time.perf_counter() - t0


def free_batch(disp: Dispersion, xis: np.ndarray, times: np.ndarray, route: str) -> ModeBatch:
    """Campo nulo: Q constante y solución cerrada cos/sin."""
    Q0 = np.sqrt(disp.L0(xis))
    phase = times[:, None] * Q0[None, :]
    c, s = np.cos(phase), np.sin(phase)
    Q = np.broadcast_to(Q0, phase.shape).copy()
    return ModeBatch(
        xis=xis, times=times, zeta0=c, zeta0_prime=-Q * s, zeta1=s / Q, zeta1_prime=c,
        A=np.ones_like(c), B=phase, C=1.0 / Q, D=phase.copy(), Q=Q, Q0=Q0, route=route,
    )


def concat_batches(batches: Sequence[ModeBatch]) -> ModeBatch:
    first = batches[0]
    cat = lambda name: np.concatenate([getattr(b, name) for b in batches], axis=-1)
    return ModeBatch(
        xis=np.concatenate([b.xis for b in batches], axis=0), times=first.times,
        zeta0=cat("zeta0"), zeta0_prime=cat("zeta0_prime"), zeta1=cat("zeta1"),
        zeta1_prime=cat("zeta1_prime"), A=cat("A"), B=cat("B"), C=cat("C"), D=cat("D"),
        Q=cat("Q"), Q0=cat("Q0"), route=first.route, nfev=sum(b.nfev for b in batches),
    )


class SweepStats:
    """Tiempos por lote del último barrido (para el benchmark)."""
    def __init__(self):
        self.chunk_seconds: List[float] = []
        self.wall_seconds: float = 0.0


def solve_modes(disp: Dispersion, xis, times, tol: Optional[float] = None,
                route: Optional[str] = None, workers: Optional[int] = None,
                progress: Optional[bool] = None, stats: Optional[SweepStats] = None) -> ModeBatch:
    """Resuelve todos los modos `xis` (K, n) en `times`; devuelve un ModeBatch con t=0 incluido."""
    route = route or settings.MODE_ROUTE
    workers = workers or settings.WORKERS
    progress = settings.PROGRESS if progress is None else progress
    xis = np.asarray(xis, dtype=float).reshape(-1, disp.params.n)
    times = sample_grid(times)
    start = time.perf_counter()

    if disp.model.is_zero:
        batch = free_batch(disp, xis, times, route)
        if stats is not None:
            stats.wall_seconds = time.perf_counter() - start
        return batch

    size = settings.MODE_CHUNK
    jobs = [(disp, xis[i:i + size], times, tol, route) for i in range(0, xis.shape[0], size)]
    logger.info("barrido: %d modos en %d lotes, t_end=%g, workers=%d",
                xis.shape[0], len(jobs), times[-1], workers)
    results: List[Tuple[ModeBatch, float]] = []
    with tqdm(total=len(jobs), disable=not progress, desc="modos", unit="lote") as bar:
        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for res in pool.map(_solve_chunk, jobs):
                    results.append(res)
                    bar.update()
        else:
            for job in jobs:
                results.append(_solve_chunk(job))
                bar.update()

    if stats is not None:
        stats.chunk_seconds = [sec for _, sec in results]
        stats.wall_seconds = time.perf_counter() - start
    return concat_batches([b for b, _ in results])

# core/errors.py
"""Jerarquía de errores. Cada clase fija el código de salida del CLI."""
from __future__ import annotations

from typing import Optional


class KGStarkError(Exception):
    exit_code = 5


class ConfigParseError(KGStarkError):
    """Documento de configuración mal formado (JSON inválido o no es un objeto)."""
    exit_code = 2


class UnknownKeyError(KGStarkError):
    exit_code = 3

    def __init__(self, key: str):
        self.key = key
        super().__init__(f"Clave desconocida: {key}")


class ConstraintError(KGStarkError):
    """Un valor viola una restricción; `constraint` es legible, p.ej. 'params.m > 0'."""
    exit_code = 4

    def __init__(self, key: str, constraint: str, detail: Optional[str] = None):
        self.key = key
        self.constraint = constraint
        msg = f"Restricción violada: {constraint}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class FieldRangeError(KGStarkError):
    pass


class QuadratureError(KGStarkError):
    pass


class SolverError(KGStarkError):
    def __init__(self, message: str, reached: float):
        self.reached = reached
        super().__init__(f"{message} (t alcanzado = {reached:.6g})")


class TrajectoryRangeError(KGStarkError):
    pass


class AliasingError(KGStarkError):
    pass


class FitError(KGStarkError):
    pass


class InvariantViolation(KGStarkError):
    pass

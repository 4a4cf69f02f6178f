# core/config.py
from math import pi

from pydantic_settings import BaseSettings, SettingsConfigDict

TOOL_VERSION = "0.1.0"


class Settings(BaseSettings):
    # Integrador de modos: RK45 (Runge–Kutta 5(4) encajado) por defecto, DOP853 disponible
    MODE_SOLVER_METHOD: str = "RK45"
    # Ruta usada en los barridos de la grilla: "direct" o "amplitude_phase"
    MODE_ROUTE: str = "direct"
    MODE_TOL: float = 1e-10
    # Techo de paso: STEP_CEILING / Q(t, ξ)
    STEP_CEILING: float = 0.25
    # Modos por lote; fijo para que el resultado no dependa de --workers
    MODE_CHUNK: int = 32
    WORKERS: int = 1
    PROGRESS: bool = False

    # Cuadratura del auditor (E1)
    QUAD_EPSREL: float = 1e-10
    QUAD_EPSABS: float = 1e-13
    QUAD_LIMIT: int = 200
    QUAD_FAIL_TOL: float = 1e-6
    # error relativo aceptado cuando QUADPACK reporta redondeo
    QUAD_ROUNDOFF_TOL: float = 1e-4
    # subdivisiones por mitades antes de declarar la cuadratura fallida
    QUAD_MAX_SPLIT: int = 3
    AUDIT_T_START: float = 1.0
    AUDIT_GROWTH_THRESHOLD: float = 0.01

    # Grilla espectral por defecto (n=1 y n=2)
    GRID_HALF_WIDTH: float = 64 * pi
    GRID_POINTS: int = 1024
    GRID_HALF_WIDTH_2D: float = 16 * pi
    GRID_POINTS_2D: int = 128
    ALIAS_TAIL_MAX: float = 1e-10
    # Coeficientes por debajo de este umbral relativo no se propagan
    SUPPORT_CUTOFF: float = 1e-14

    # Norma de operador: muestras mínimas y refinamiento
    OPNORM_SAMPLES: int = 64
    OPNORM_REL_CHANGE: float = 1e-3
    OPNORM_MAX_REFINE: int = 3

    OUTPUT_DIR: str = "runs"
    LOG_LEVEL: str = "INFO"

    # Pydantic settings
    model_config = SettingsConfigDict(
        env_file=".env", env_file_encoding="utf-8", env_prefix="KGSTARK_", extra="ignore"
    )

    # Etapas por paso del método elegido (para estimar pasos desde nfev)
    @property
    def SOLVER_STAGES(self) -> int:
        return {"DOP853": 12, "RK45": 6, "RK23": 3}.get(self.MODE_SOLVER_METHOD, 1)


settings = Settings()

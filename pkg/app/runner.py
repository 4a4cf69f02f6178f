# app/runner.py
from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional, Tuple

from core.config import settings
from core.errors import ConfigParseError, ConstraintError
from harness.artifacts import write_run
from harness.config import ExperimentConfig
from harness.experiments import run_experiment
from safeguards.config_parser import RunConfig, parse_config

logger = logging.getLogger(__name__)

# Código de salida cuando algún chequeo afirmado no se cumple
EXIT_CHECKS_FAILED = 1


def load_config(path: Optional[Path]) -> RunConfig:
    """Sin --config se usa el documento vacío (todos los valores por defecto)."""
    if path is None:
        return parse_config("{}")
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigParseError(f"no se pudo leer {path}: {exc}") from exc
    return parse_config(text)


def run(config: RunConfig, experiment: str, out: Optional[Path] = None,
        workers: Optional[int] = None, base_dir: Optional[Path] = None) -> Tuple[int, Path]:
    """Ejecuta el experimento, escribe los artefactos y devuelve (código de salida, directorio)."""
    if config.experiment is not None and config.experiment != experiment:
        raise ConstraintError("experiment", f"experiment == {experiment} (subcomando)")
    if workers is not None and workers < 1:
        raise ConstraintError("workers", "--workers >= 1")

    # 1) objetos de dominio, validados antes de calcular nada
    cfg = ExperimentConfig.from_run_config(config, base_dir=base_dir, workers=workers)

    # 2) experimento
    result = run_experiment(experiment, cfg)

    # 3) artefactos
    normalized = config.model_dump(mode="json")
    normalized["experiment"] = experiment
    normalized.pop("output_dir", None)
    out_dir = Path(out or config.output_dir or settings.OUTPUT_DIR)
    run_dir = write_run(result, normalized, out_dir)

    for line in result.warnings:
        logger.warning(line)
    if not result.passed:
        failed = [name for name, ok in result.checks.items() if not ok]
        logger.warning("%s: chequeos fallidos: %s", experiment, ", ".join(failed))
        return EXIT_CHECKS_FAILED, run_dir
    return 0, run_dir

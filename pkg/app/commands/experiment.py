# app/commands/experiment.py
from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

import click

from app.runner import run, load_config
from core.errors import KGStarkError
from core.logging_setup import setup_logging

logger = logging.getLogger(__name__)

HELP = {
    "simulate": "Propaga un estado inicial y verifica identidad, determinante y norma.",
    "stability": "Envolvente de ‖U₀,₀(t)‖ sobre tiempos log-espaciados.",
    "instability": "Pendientes de ‖U₀,α(t)Φ‖ contra |b(t)| para cada α ≠ 0.",
    "decay": "Tasas de decaimiento de ‖L(0,p)^θ ψ₀(t)‖.",
    "energy": "Cota de energía a dos lados e(t)/e(0).",
    "audit-e1": "Auditoría de las condiciones de integrabilidad (E1) del campo.",
    "bench": "Benchmark de las rutas de integración y del barrido paralelo.",
}


def make_command(name: str) -> click.Command:
    @click.command(name=name, help=HELP[name])
    @click.option("--config", "config_path", type=click.Path(dir_okay=False, path_type=Path),
                  default=None, help="Documento JSON de la corrida.")
    @click.option("--out", "out", type=click.Path(file_okay=False, path_type=Path),
                  default=None, help="Directorio de salida (por defecto output_dir o KGSTARK_OUTPUT_DIR).")
    @click.option("--workers", type=int, default=None, help="Procesos para el barrido de modos.")
    @click.option("--log-level", default=None, help="DEBUG, INFO, WARNING...")
    @click.pass_context
    def command(ctx: click.Context, config_path: Optional[Path], out: Optional[Path],
                workers: Optional[int], log_level: Optional[str]) -> None:
        setup_logging(log_level)
        try:
            config = load_config(config_path)
            base_dir = config_path.parent if config_path is not None else None
            code, run_dir = run(config, name, out=out, workers=workers, base_dir=base_dir)
        except KGStarkError as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(exc.exit_code)
        except Exception as exc:
            # fallo no previsto durante el cálculo: 1 queda reservado para chequeos fallidos
            logger.exception("%s: error inesperado", name)
            click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
            ctx.exit(KGStarkError.exit_code)
        click.echo(str(run_dir))
        ctx.exit(code)

    return command


COMMANDS = {name: make_command(name) for name in HELP}

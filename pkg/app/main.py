"""Punto de entrada del CLI por lotes: python -m app.main <subcomando> --config <ruta>."""

import click

from app.commands.experiment import COMMANDS
from core.config import TOOL_VERSION


@click.group()
@click.version_option(TOOL_VERSION, prog_name="kg-stark")
def cli() -> None:
    """Propagadores de Klein–Gordon con campos eléctricos homogéneos dependientes del tiempo."""


for _command in COMMANDS.values():
    cli.add_command(_command)


if __name__ == "__main__":
    cli()

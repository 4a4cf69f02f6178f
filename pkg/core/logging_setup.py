# core/logging_setup.py
import logging
import sys

from core.config import settings

_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def setup_logging(level: str | None = None) -> None:
    """Un único handler a stderr; llamadas repetidas cambian el nivel y reenganchan el stream actual."""
    root = logging.getLogger()
    root.setLevel((level or settings.LOG_LEVEL).upper())
    for handler in root.handlers:
        if getattr(handler, "_kgstark", False):
            # sin flush: el stream anterior puede estar cerrado
            handler.stream = sys.stderr
            return
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(_FORMAT))
    handler._kgstark = True  # type: ignore[attr-defined]
    root.addHandler(handler)

"""
Logging setup: rich handler on stderr plus a helper for structured events.
"""
import logging
from typing import Any

import orjson
from rich.console import Console
from rich.logging import RichHandler

from . import config

ROOT = "iclust"


def setup_logging(level: str | int | None = None) -> logging.Logger:
    logger = logging.getLogger(ROOT)
    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        handler = RichHandler(console=Console(stderr=True), show_path=False,
                              rich_tracebacks=False, markup=False)
        handler.setFormatter(logging.Formatter("%(message)s"))
        logger.addHandler(handler)
        logger.propagate = False
    logger.setLevel(level if level is not None else config.LOG_LEVEL)
    return logger


def log_event(logger: logging.Logger, level: int, event: str, **fields: Any) -> None:
    """Emit one structured record: the event name followed by its fields as JSON."""
    if not logger.isEnabledFor(level):
        return
    detail = orjson.dumps(fields, option=orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY,
                          default=str).decode()
    logger.log(level, "%s %s", event, detail, extra={"event": event, "fields": fields})

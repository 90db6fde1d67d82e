"""Logging for dsprec: one rich handler on the package logger.

Python warnings (numpy overflow while a run diverges, for example) are
captured into the same handler instead of printing raw to stderr.
"""

from __future__ import annotations

import logging

from rich.logging import RichHandler

from .console import err_console

_logger: logging.Logger | None = None


def get_logger(name: str | None = None) -> logging.Logger:
    """Get the package logger, or one of its children."""
    global _logger
    if _logger is None:
        pkg = (__package__ or __name__).split(".")[0]
        _logger = logging.getLogger(pkg)
    if name:
        return _logger.getChild(name)
    return _logger


def setup_logging(verbose: bool = False) -> None:
    """Attach the handler once; DEBUG with ``verbose``, INFO otherwise."""
    logger = get_logger()
    if logger.handlers:
        return

    level = logging.DEBUG if verbose else logging.INFO
    logger.setLevel(level)
    handler = RichHandler(
        console=err_console,
        show_time=False,
        show_path=verbose,
        rich_tracebacks=True,
    )
    handler.setLevel(level)
    logger.addHandler(handler)

    logging.captureWarnings(True)
    py_warnings = logging.getLogger("py.warnings")
    if not py_warnings.handlers:
        py_warnings.addHandler(handler)

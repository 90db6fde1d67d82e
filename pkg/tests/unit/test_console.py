"""Unit tests for dsprec.utils.console and dsprec.utils.log modules."""

from __future__ import annotations

import logging
import warnings

import pytest
from rich.logging import RichHandler

from dsprec.utils.console import check_style, green, red, yellow
from dsprec.utils.log import get_logger, setup_logging

pytestmark = [pytest.mark.fast, pytest.mark.cli]


@pytest.fixture
def clean_logging():
    """Restore the package and warnings loggers after a test."""
    loggers = [get_logger(), logging.getLogger("py.warnings")]
    saved = [(lg, list(lg.handlers), lg.level) for lg in loggers]
    for lg in loggers:
        lg.handlers.clear()
    yield
    logging.captureWarnings(False)
    for lg, handlers, level in saved:
        lg.handlers[:] = handlers
        lg.setLevel(level)


class TestConsole:
    def test_markup(self):
        assert green("ok") == "[ok]ok[/ok]"
        assert red("bad") == "[error]bad[/error]"
        assert yellow("hm") == "[warning]hm[/warning]"

    def test_check_style(self):
        assert check_style(True) == "check.pass"
        assert check_style(False) == "check.fail"


class TestLogging:
    def test_child_loggers(self):
        assert get_logger().name == "dsprec"
        assert get_logger("optimizer").name == "dsprec.optimizer"

    def test_setup_is_idempotent(self, clean_logging):
        setup_logging(verbose=True)
        setup_logging(verbose=False)
        logger = get_logger()
        assert len(logger.handlers) == 1
        assert isinstance(logger.handlers[0], RichHandler)
        assert logger.level == logging.DEBUG

    def test_warnings_share_the_handler(self, clean_logging):
        setup_logging()
        py_warnings = logging.getLogger("py.warnings")
        assert py_warnings.handlers == get_logger().handlers
        records = []
        py_warnings.addHandler(logging.Handler())
        py_warnings.handlers[-1].emit = records.append
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.warn("overflow encountered", RuntimeWarning, stacklevel=1)
        assert any("overflow encountered" in r.getMessage() for r in records)

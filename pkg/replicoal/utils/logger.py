import os
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from logging import Logger, LoggerAdapter, StreamHandler, getLogger
from typing import Literal, cast, override

type LogLevel = Literal["CRITICAL", "FATAL", "ERROR", "WARN", "WARNING", "INFO", "DEBUG"]

LOGLVL_ENV = "REPLICOAL_LOGLVL"


class CustomAdapter(LoggerAdapter):
    def __init__(self, logger: Logger):
        super().__init__(logger)
        self._labels: list[str] = []

    @override
    def process(self, msg, kwargs):
        if self._labels:
            msg = f"[{'/'.join(self._labels)}] {msg}"
        return msg, kwargs

    @contextmanager
    def labelled(self, label: str) -> Iterator[None]:
        """
        Prefix log entries emitted inside the block with ``[label]``.

        Nested labels are joined with '/', e.g. ``[bottleneck/start 2]``.
        """
        self._labels.append(label)
        try:
            yield
        finally:
            self._labels.pop()

    def set_default_level(self, dflt_level: LogLevel):
        """
        Configure logging level.

        If ``REPLICOAL_LOGLVL`` environment variable contains a valid log level, it is used.
        Otherwise, ``dflt_level`` is used as the logging level.
        """
        try:
            self.setLevel(os.getenv(LOGLVL_ENV, dflt_level))
        except ValueError:  # not a valid level
            self.setLevel(dflt_level)


log = CustomAdapter(getLogger("replicoal"))
"""
Package logger, writing to standard output.
"""

log.set_default_level("INFO")
cast(Logger, log.logger).addHandler(StreamHandler(sys.stdout))

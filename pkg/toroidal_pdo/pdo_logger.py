import os
import logging

from pathlib import Path
from logging import Logger
from typing import Optional

ROOT_NAME = 'PDOLogger'
LOG_FILE_VARIABLE = 'TOROIDAL_PDO_LOG_FILE'
FILE_FORMAT = "%(asctime)s [%(levelname)-5.5s]  %(message)s"


class PDOLogger:

    def __init__(self, name_suffix: str = None):
        """Logging entry point for the calculus and the experiment harness

        Every module asks for PDOLogger(__name__).get_logger(). The returned logger is a child of a single 'PDOLogger'
        logger; only that top-level logger carries handlers, so building the same child many times (e.g. once per
        instance of a class) never duplicates output. The top-level logger does not propagate to the root logger.

        When the environment variable TOROIDAL_PDO_LOG_FILE names a path, a plain-text copy of every message is
        appended to it.

        :param name_suffix: Child name, normally __name__. None returns the top-level logger itself.
        """

        self._log_file = self._requested_log_file()
        self._root = logging.getLogger(ROOT_NAME)
        if not self._root.handlers:
            self._configure_root()

        self._logger = self._root if name_suffix is None else self._root.getChild(name_suffix)

    @staticmethod
    def _requested_log_file() -> Optional[Path]:
        log_file = os.environ.get(LOG_FILE_VARIABLE)
        return Path(log_file) if log_file else None

    def _configure_root(self) -> None:
        self._root.addHandler(logging.StreamHandler())
        if self._log_file is not None:
            file_handler = logging.FileHandler(self._log_file)
            file_handler.setFormatter(logging.Formatter(FILE_FORMAT))
            self._root.addHandler(file_handler)
        self._root.propagate = False
        self._root.setLevel(logging.INFO)

    def get_logger(self) -> Logger:
        return self._logger

    def get_log_file_path(self) -> Optional[Path]:
        """Path of the plain-text log, or None when TOROIDAL_PDO_LOG_FILE was not set when logging was configured"""

        for handler in self._root.handlers:
            if isinstance(handler, logging.FileHandler):
                return Path(handler.baseFilename)
        return None

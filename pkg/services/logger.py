"""
Сервис логирования.
Single Responsibility: только логирование событий.
"""

import logging
import sys
from pathlib import Path
from typing import Protocol


class LoggerProtocol(Protocol):
    """Интерфейс логгера (Dependency Inversion)."""

    def info(self, message: str) -> None: ...
    def warning(self, message: str) -> None: ...
    def error(self, message: str) -> None: ...
    def debug(self, message: str) -> None: ...


class AppLogger:
    """
    Логгер лаборатории.
    Консоль пишет в stderr: stdout занят JSON отчётами.
    """

    _instance = None

    def __new__(cls, log_file: Path | None = None, verbose: bool = False):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._initialized = False
        return cls._instance

    def __init__(self, log_file: Path | None = None, verbose: bool = False):
        if self._initialized:
            # Повторный вызов может только поднять подробность
            if verbose:
                self.set_verbose(True)
            if log_file and self._file_handler is None:
                self._attach_file(log_file)
            return

        self._logger = logging.getLogger("EllipticLab")
        self._logger.setLevel(logging.DEBUG)
        self._logger.propagate = False

        self._formatter = logging.Formatter(
            "%(asctime)s | %(levelname)-8s | %(message)s", datefmt="%Y-%m-%d %H:%M:%S"
        )

        self._console_handler = logging.StreamHandler(sys.stderr)
        self._console_handler.setLevel(logging.DEBUG if verbose else logging.INFO)
        self._console_handler.setFormatter(self._formatter)
        self._logger.addHandler(self._console_handler)

        self._file_handler: logging.FileHandler | None = None
        if log_file:
            self._attach_file(log_file)

        self._initialized = True

    def _attach_file(self, log_file: Path) -> None:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        self._file_handler = logging.FileHandler(log_file, encoding="utf-8", mode="a")
        self._file_handler.setLevel(logging.DEBUG)
        self._file_handler.setFormatter(self._formatter)
        self._logger.addHandler(self._file_handler)

    def set_verbose(self, verbose: bool) -> None:
        self._console_handler.setLevel(logging.DEBUG if verbose else logging.INFO)

    def info(self, message: str) -> None:
        self._logger.info(message)

    def warning(self, message: str) -> None:
        self._logger.warning(message)

    def error(self, message: str) -> None:
        self._logger.error(message)

    def debug(self, message: str) -> None:
        self._logger.debug(message)


def get_logger(log_file: Path | None = None, verbose: bool = False) -> AppLogger:
    """Фабричная функция для получения логгера."""
    return AppLogger(log_file, verbose)

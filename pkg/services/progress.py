"""
Сервис отслеживания прогресса прогона манифеста.
Single Responsibility: только подсчёт завершённых кейсов и уведомление подписчика.
"""

from dataclasses import dataclass
from threading import Lock
from typing import Callable, Protocol


@dataclass(frozen=True)
class ProgressInfo:
    """Состояние после очередного завершённого кейса."""

    current: int
    total: int
    case: str = ""
    passed: bool | None = None
    failed: int = 0

    @property
    def percentage(self) -> float:
        if self.total == 0:
            return 100.0
        return (self.current / self.total) * 100

    @property
    def message(self) -> str:
        if self.passed is None:
            return f"{self.current}/{self.total}"
        status = "пройден" if self.passed else "провален"
        return f"[{self.current}/{self.total}] {self.case}: {status}"


class ProgressCallback(Protocol):
    """Интерфейс подписчика на прогресс."""

    def __call__(self, progress: ProgressInfo) -> None: ...


class ProgressTracker:
    """
    Трекер прогресса.
    Кейсы завершаются в пулах потоков, поэтому счётчики защищены блокировкой.
    """

    def __init__(self, callback: Callable[[ProgressInfo], None] | None = None):
        self._callback = callback
        self._lock = Lock()
        self._current = 0
        self._total = 0
        self._failed = 0

    def start(self, total: int) -> None:
        with self._lock:
            self._total = total
            self._current = 0
            self._failed = 0
            info = ProgressInfo(0, total)
        self._notify(info)

    def advance(self, case: str, passed: bool) -> None:
        """Отметить завершение кейса."""
        with self._lock:
            self._current += 1
            self._failed += 0 if passed else 1
            info = ProgressInfo(self._current, self._total, case, passed, self._failed)
        self._notify(info)

    def _notify(self, info: ProgressInfo) -> None:
        if self._callback:
            self._callback(info)

    @property
    def current(self) -> int:
        return self._current

    @property
    def total(self) -> int:
        return self._total

    @property
    def failed(self) -> int:
        return self._failed

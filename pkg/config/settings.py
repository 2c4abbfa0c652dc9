"""
Централизованные настройки лаборатории.
Следуя принципу Single Responsibility - только конфигурация.
"""

import os
import sys
from dataclasses import dataclass
from pathlib import Path


def get_app_dir() -> Path:
    """Получить директорию приложения (для exe и dev режима)."""
    if getattr(sys, "frozen", False):
        return Path(sys.executable).parent
    return Path(__file__).parent.parent


@dataclass(frozen=True)
class AppSettings:
    """Неизменяемые настройки приложения."""

    # Версия схемы JSON отчётов
    SCHEMA_VERSION: str = "1"

    # Потоки для параллельного прогона кейсов манифеста
    MAX_WORKERS: int = 4

    # Допуски
    MATRIX_TOL: float = 1e-10
    ANALYTIC_TOL: float = 1e-6
    GRID_TOL: float = 5e-3
    POHOZAEV_ANALYTIC_TOL: float = 1e-8
    POHOZAEV_TRUNCATED_TOL: float = 1e-4
    DEGENERATE_ENERGY: float = 1e-14

    # Квадратуры: радиальные узлы и угловые правила по размерности
    RADIAL_NODES: int = 64
    ANGULAR_NODES_2D: int = 256
    POLAR_NODES_3D: int = 48
    AZIMUTH_NODES_3D: int = 96
    POLAR_NODES_HIGH_DIM: int = 6
    AZIMUTH_NODES_HIGH_DIM: int = 12

    # Регуляризация семейства PS у начала координат
    R_MIN: float = 1e-4

    # Лестница радиусов по умолчанию
    LADDER_START: float = 0.1
    LADDER_STOP: float = 1.0
    LADDER_COUNT: int = 12

    # Выборка для осцилляции
    OSC_SAMPLES: int = 4096
    # Точный показатель решения против подгонок: |α_osc - α| и |α_implied - α_osc|
    OSC_EXPONENT_TOL: float = 0.02
    EXPONENT_CONSISTENCY_TOL: float = 0.05

    # Производные коэффициентов разностями (запасной вариант)
    FD_DERIVATIVE_STEP: float = 1e-5

    # Решатель
    SOLVER_METHOD: str = "cg"  # "cg" | "direct"
    SOLVER_RTOL: float = 1e-10
    SOLVER_ITERATION_FACTOR: int = 50
    RADIAL_GRADING: float = 1.0
    MIN_NODES_PER_DIRECTION: int = 8
    SOLVER_EXACT_TOL: float = 1e-7

    # Наблюдаемый порядок решателя и стартовая сетка исследования сходимости
    CONVERGENCE_ORDER: float = 2.0
    CONVERGENCE_ORDER_TOL: float = 0.3
    CONVERGENCE_NR: int = 32
    CONVERGENCE_NTHETA: int = 64
    CONVERGENCE_LEVELS: int = 3

    EXPONENT_TOL: float = 1e-12
    POINCARE_TOL: float = 1e-10
    NAIVE_TOL: float = 1e-8

    # Сетка по умолчанию
    DEFAULT_NR: int = 64
    DEFAULT_NTHETA: int = 128
    DEFAULT_NPHI: int = 32

    # Перебор (ε, T)
    DEFAULT_RESOLUTION: int = 1000

    DEFAULT_SEED: int = 0

    @property
    def app_dir(self) -> Path:
        return get_app_dir()

    def output_dir(self, requested: Path | None = None) -> Path | None:
        """ELAB_OUT сильнее --out; без обоих отчёт печатается только в stdout."""
        override = os.environ.get("ELAB_OUT")
        if override:
            return Path(override)
        return requested

    def log_file(self, requested: Path | None = None) -> Path | None:
        if requested:
            return requested
        override = os.environ.get("ELAB_LOG")
        return Path(override) if override else None

    @property
    def manifests_dir(self) -> Path:
        return self.app_dir / "config" / "manifests"


# Глобальный экземпляр настроек (Singleton через модуль)
settings = AppSettings()

"""
Иерархия исключений лаборатории.
Каждый модуль поднимает свои подклассы, оркестратор ловит LabError.
"""


class LabError(Exception):
    """Базовое исключение лаборатории."""

    pass


class DomainError(LabError, ValueError):
    """Аргумент вне области определения операции."""

    pass


class OrderingError(DomainError):
    """Нарушен порядок границ эллиптичности: требуется 0 < λ ≤ Λ."""

    pass


class SymmetryError(LabError, ValueError):
    """Матрица коэффициентов несимметрична."""

    pass


class CapabilityError(LabError):
    """У поля нет нужного вычислителя (например, производных ∂A)."""

    pass


class UnsupportedFamilyError(DomainError):
    """Запрошено семейство решений, которого нет в библиотеке."""

    pass


class DimensionMismatchError(DomainError):
    """Размерности поля, решения, правила или сетки не совпадают."""

    pass


class DegenerateSolutionError(LabError):
    """Решение численно постоянно: энергия или осцилляция ниже порога."""

    pass


class InsufficientLadderError(LabError, ValueError):
    """Лестница радиусов или сеток слишком короткая для подгонки."""

    pass


class SolverError(LabError):
    """Итерационный решатель не сошёлся за отведённое число итераций."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class SpecError(LabError, ValueError):
    """Некорректный дескриптор поля, решения или граничных данных."""

    pass


class ManifestError(LabError):
    """Ошибка загрузки манифеста кейсов."""

    pass


class ExportError(LabError):
    """Ошибка записи отчёта или файлов данных."""

    pass

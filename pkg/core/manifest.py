"""
Загрузка и проверка манифестов прогонов.
Single Responsibility: только чтение описаний кейсов и их валидация.

Манифест - JSON ({"schema": "1", "cases": [...]} или просто список кейсов)
или лист .xlsx: первая строка - заголовки (ключи кейса), далее один кейс на строку.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from openpyxl import load_workbook

from config.settings import settings
from core.errors import ManifestError
from services.logger import get_logger

CASE_KEYS = (
    "name",
    "command",
    "field",
    "solution",
    "boundary",
    "n",
    "lambda",
    "Lambda",
    "nr",
    "ntheta",
    "nphi",
    "ladder",
    "tol",
    "resolution",
    "seed",
    "sweep",
    "count",
)

INTEGER_KEYS = ("n", "nr", "ntheta", "nphi", "resolution", "seed", "count")
FLOAT_KEYS = ("lambda", "Lambda", "tol")

# Для каждой команды - наборы ключей, любого из которых достаточно;
# пакет (count) сам тянет n, λ, Λ для exponent и optimize
REQUIREMENTS: dict[str, tuple[tuple[str, ...], ...]] = {
    "exponent": (("n", "lambda", "Lambda"), ("sweep",), ("count",)),
    "optimize": (("n", "lambda", "Lambda"), ("count",)),
    "pohozaev": (("field", "solution"), ("field", "boundary")),
    "monotonicity": (("field", "solution"), ("field", "boundary")),
    "convergence": (("field", "boundary"),),
    "poincare": (("solution",),),
    "naive": (("n",),),
}


@dataclass
class ValidationResult:
    """Результат проверки манифеста."""

    is_valid: bool
    errors: list[str]
    warnings: list[str]

    @classmethod
    def success(cls, warnings: list[str] | None = None) -> "ValidationResult":
        return cls(is_valid=True, errors=[], warnings=warnings or [])

    @classmethod
    def failure(
        cls, errors: list[str], warnings: list[str] | None = None
    ) -> "ValidationResult":
        return cls(is_valid=False, errors=errors, warnings=warnings or [])


class ManifestValidator:
    """Проверка кейсов до запуска: команда, обязательные ключи, типы, уникальность имён."""

    def validate(self, cases: list[dict]) -> ValidationResult:
        """
        Проверить список кейсов.

        Args:
            cases: Кейсы после загрузки (словари ключ - значение)

        Returns:
            Результат проверки с ошибками и предупреждениями
        """
        errors: list[str] = []
        warnings: list[str] = []
        seen: set[str] = set()

        for index, case in enumerate(cases, start=1):
            errors.extend(f"Кейс {index}: {message}" for message in self.validate_case(case))
            unknown = set(case) - set(CASE_KEYS)
            if unknown:
                warnings.append(
                    f"Кейс {index}: неизвестные ключи игнорируются: {', '.join(sorted(unknown))}"
                )
            name = case.get("name")
            if name is not None:
                if name in seen:
                    errors.append(f"Кейс {index}: имя '{name}' уже встречалось")
                seen.add(name)

        if errors:
            return ValidationResult.failure(errors, warnings)
        return ValidationResult.success(warnings)

    def validate_case(self, case: dict) -> list[str]:
        """Ошибки одного кейса (пустой список, если всё в порядке)."""
        command = case.get("command")
        if command not in REQUIREMENTS:
            return [f"неизвестная команда '{command}'; допустимы: {', '.join(REQUIREMENTS)}"]

        errors = []
        alternatives = REQUIREMENTS[command]
        if not any(all(key in case for key in keys) for keys in alternatives):
            variants = " или ".join("+".join(keys) for keys in alternatives)
            errors.append(f"команде {command} нужны ключи {variants}")
        if "solution" in case and "boundary" in case:
            errors.append("solution и boundary взаимоисключающие")

        for key in INTEGER_KEYS:
            if key in case and not _is_integer(case[key]):
                errors.append(f"{key} должен быть целым: {case[key]!r}")
        for key in FLOAT_KEYS:
            if key in case and not _is_number(case[key]):
                errors.append(f"{key} должен быть числом: {case[key]!r}")
        if "count" in case and _is_integer(case["count"]) and float(case["count"]) < 1:
            errors.append(f"count должен быть положительным: {case['count']!r}")
        if "count" in case and "sweep" in case:
            errors.append("count и sweep взаимоисключающие")
        return errors


def _is_number(value) -> bool:
    if isinstance(value, bool):
        return False
    try:
        float(value)
    except (TypeError, ValueError):
        return False
    return True


def _is_integer(value) -> bool:
    return _is_number(value) and float(value) == int(float(value))


class ManifestLoaderProtocol(Protocol):
    """Интерфейс загрузчика манифестов."""

    def load(self, source: str) -> list[dict]: ...


class ManifestLoader:
    """
    Загрузчик манифестов.
    Источник - имя встроенного манифеста (например, "paper-suite"), путь к .json или .xlsx.
    """

    SUPPORTED_EXTENSIONS = (".json", ".xlsx")

    def __init__(self, validator: ManifestValidator | None = None):
        self._validator = validator or ManifestValidator()
        self._logger = get_logger()

    def resolve(self, source: str) -> Path:
        """Путь к файлу манифеста; встроенные имена ищутся в config/manifests."""
        path = Path(source)
        if path.exists():
            return path
        bundled = settings.manifests_dir / f"{source.replace('-', '_')}.json"
        if bundled.exists():
            return bundled
        raise ManifestError(f"Манифест не найден: {source}")

    def load(self, source: str) -> list[dict]:
        """
        Загрузить и проверить манифест.

        Args:
            source: Имя встроенного манифеста или путь к файлу

        Returns:
            Список кейсов; безымянные кейсы получают имя command-номер

        Raises:
            ManifestError: Файл не найден, не читается или не прошёл проверку
        """
        path = self.resolve(source)
        suffix = path.suffix.lower()
        if suffix not in self.SUPPORTED_EXTENSIONS:
            raise ManifestError(
                f"Неподдерживаемый формат манифеста: {path.suffix}. "
                f"Поддерживаются: {', '.join(self.SUPPORTED_EXTENSIONS)}"
            )

        cases = self._load_json(path) if suffix == ".json" else self._load_xlsx(path)
        cases = [
            {"name": f"{case.get('command', 'case')}-{index}", **case}
            for index, case in enumerate(cases, start=1)
        ]

        validation = self._validator.validate(cases)
        for warning in validation.warnings:
            self._logger.warning(warning)
        if not validation.is_valid:
            for error in validation.errors:
                self._logger.error(error)
            raise ManifestError("\n".join(validation.errors))

        self._logger.info(f"Манифест {path.name}: {len(cases)} кейсов")
        return cases

    def _load_json(self, path: Path) -> list[dict]:
        try:
            document = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ManifestError(f"Ошибка чтения манифеста {path}: {e}")

        if isinstance(document, dict):
            schema = str(document.get("schema", settings.SCHEMA_VERSION))
            if schema != settings.SCHEMA_VERSION:
                raise ManifestError(
                    f"Версия схемы манифеста {schema} не поддерживается "
                    f"(ожидается {settings.SCHEMA_VERSION})"
                )
            document = document.get("cases", [])
        if not isinstance(document, list) or not all(isinstance(c, dict) for c in document):
            raise ManifestError(f"Манифест {path} должен содержать список кейсов-объектов")
        return [dict(case) for case in document]

    def _load_xlsx(self, path: Path) -> list[dict]:
        try:
            wb = load_workbook(path, read_only=True, data_only=True)
            ws = wb.active
            rows = list(ws.iter_rows(values_only=True))
            wb.close()
        except Exception as e:
            raise ManifestError(f"Ошибка чтения Excel манифеста {path}: {e}")

        if not rows:
            return []
        headers = [str(h).strip() if h is not None else "" for h in rows[0]]

        cases = []
        for row in rows[1:]:
            # Пустые ячейки означают "по умолчанию"
            case = {
                headers[i]: value.strip() if isinstance(value, str) else value
                for i, value in enumerate(row)
                if i < len(headers) and headers[i] and _filled(value)
            }
            if case:
                cases.append(case)
        return cases


def _filled(value) -> bool:
    return value is not None and str(value).strip() != ""

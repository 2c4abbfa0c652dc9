"""
Экспорт результатов: JSON отчёты, файлы данных для графиков, таблицы развёрток.
Single Responsibility: сериализация и запись файлов.
"""

import csv
import io
import json
import re
from datetime import datetime, timezone
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np
from openpyxl import Workbook

from config.settings import settings
from core.errors import ExportError


def _json_default(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Не сериализуется в JSON: {type(value).__name__}")


def document(body: dict, timestamp: bool = True) -> dict:
    """Обернуть тело отчёта версией схемы и временем создания."""
    out = {"schema": settings.SCHEMA_VERSION, **body}
    if timestamp:
        out["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return out


def to_json(payload: dict) -> str:
    """JSON с отсортированными ключами: одинаковый вход даёт одинаковые байты."""
    try:
        return json.dumps(
            payload, sort_keys=True, indent=2, ensure_ascii=False, default=_json_default
        )
    except (TypeError, ValueError) as e:
        raise ExportError(f"Отчёт не сериализуется в JSON: {e}")


def to_csv(columns: Sequence[str], rows: Sequence[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows([[_plain(v) for v in row] for row in rows])
    return buffer.getvalue()


def _plain(value):
    return value.item() if isinstance(value, np.generic) else value


class ExporterProtocol(Protocol):
    """Интерфейс экспортера."""

    def write_json(self, payload: dict, filename: str) -> Path: ...
    def write_plot(self, name: str, columns: Sequence[str], data: np.ndarray) -> Path: ...


class ReportExporter:
    """
    Запись артефактов прогона в выходную папку.
    Имена файлов очищаются от недопустимых символов; существующие файлы не перезаписываются.
    """

    INVALID_CHARS_PATTERN = re.compile(r'[<>:"/\\|?*\x00-\x1f,=\s]')
    TABLE_FORMATS = ("csv", "xlsx")

    def __init__(self, output_dir: Path):
        """
        Args:
            output_dir: Папка для отчётов и файлов данных
        """
        self._output_dir = output_dir
        try:
            self._output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ExportError(f"Не удалось создать папку для результатов {output_dir}: {e}")

    @property
    def output_dir(self) -> Path:
        return self._output_dir

    def write_json(self, payload: dict, filename: str) -> Path:
        """
        Сохранить JSON отчёт.

        Args:
            payload: Готовый документ (см. document)
            filename: Имя файла без расширения

        Returns:
            Путь к сохранённому файлу
        """
        return self._write_text(to_json(payload) + "\n", filename, ".json")

    def write_plot(self, name: str, columns: Sequence[str], data: np.ndarray) -> Path:
        """
        Файл данных для графика: столбцы через пробел, одна строка заголовка "# ...".

        Args:
            name: Имя файла без расширения
            columns: Названия столбцов
            data: Массив (строки, столбцы)

        Returns:
            Путь к сохранённому файлу
        """
        table = np.atleast_2d(np.asarray(data, dtype=float))
        if table.shape[1] != len(columns):
            raise ExportError(
                f"Данных {table.shape[1]} столбцов, заголовков {len(columns)}: {name}"
            )
        path = self._target(name, ".dat")
        try:
            np.savetxt(path, table, fmt="%.17g", header=" ".join(columns), comments="# ")
        except OSError as e:
            raise ExportError(f"Ошибка сохранения файла {path}: {e}")
        return path

    def write_table(
        self, name: str, columns: Sequence[str], rows: Sequence[Sequence], fmt: str = "csv"
    ) -> Path:
        """Таблица развёртки в .csv или .xlsx."""
        if fmt not in self.TABLE_FORMATS:
            raise ExportError(
                f"Неподдерживаемый формат таблицы: {fmt}. "
                f"Поддерживаются: {', '.join(self.TABLE_FORMATS)}"
            )
        if fmt == "csv":
            return self._write_text(to_csv(columns, rows), name, ".csv")

        path = self._target(name, ".xlsx")
        wb = Workbook()
        ws = wb.active
        ws.title = "sweep"
        ws.append(list(columns))
        for row in rows:
            ws.append([_plain(v) for v in row])
        try:
            wb.save(path)
        except OSError as e:
            raise ExportError(f"Ошибка сохранения файла {path}: {e}")
        return path

    def _write_text(self, text: str, name: str, suffix: str) -> Path:
        path = self._target(name, suffix)
        try:
            path.write_text(text, encoding="utf-8")
        except OSError as e:
            raise ExportError(f"Ошибка сохранения файла {path}: {e}")
        return path

    def _target(self, name: str, suffix: str) -> Path:
        return self._get_unique_path(self._output_dir / (self.sanitize(name) + suffix))

    def sanitize(self, name: str) -> str:
        """Очистить имя файла от недопустимых символов."""
        sanitized = self.INVALID_CHARS_PATTERN.sub("_", name)
        sanitized = re.sub(r"_+", "_", sanitized).strip("_")
        return sanitized[:200] or "report"

    def _get_unique_path(self, file_path: Path) -> Path:
        """Добавить номер к имени, если файл уже существует."""
        if not file_path.exists():
            return file_path
        counter = 1
        while True:
            candidate = file_path.with_name(f"{file_path.stem}_{counter}{file_path.suffix}")
            if not candidate.exists():
                return candidate
            counter += 1

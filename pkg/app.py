"""
Точка входа в приложение.
Связывает командную строку с бизнес-логикой.
"""

import sys
from pathlib import Path

# Добавляем корневую директорию в путь для импортов
sys.path.insert(0, str(Path(__file__).parent))

from cli.commands import EXIT_FAILED, EXIT_OK, EXIT_USAGE, build_parser, config_from_args
from config.settings import settings
from core.errors import ExportError, LabError, ManifestError, SpecError
from core.exporter import ReportExporter, document, to_csv, to_json
from core.manifest import ManifestLoader
from core.suite import (
    CaseOutcome,
    RunConfig,
    SuiteRunner,
    export_outcome,
    export_suite,
    run_case,
)
from services.logger import get_logger
from services.progress import ProgressInfo


class Application:
    """
    Главный класс приложения.
    Связывает разбор аргументов, прогон кейсов и экспорт (Mediator pattern).
    """

    def __init__(self, argv: list[str] | None = None):
        self._args = build_parser().parse_args(argv)
        self._logger = get_logger(settings.log_file(self._args.log), self._args.verbose)
        self._output_dir = settings.output_dir(self._args.out)
        self._logger.debug(f"Команда {self._args.command}, папка отчётов: {self._output_dir}")

    def run(self) -> int:
        """
        Выполнить команду.

        Returns:
            Код выхода: 0 - все вердикты пройдены, 1 - есть проваленные, 2 - ошибка ввода
        """
        try:
            if self._args.command == "report":
                return self._run_report()
            return self._run_single(config_from_args(self._args))
        except (SpecError, ManifestError) as err:
            self._logger.error(str(err))
            return EXIT_USAGE
        except ExportError as err:
            self._logger.error(f"Ошибка экспорта: {err}")
            return EXIT_FAILED

    def _run_single(self, config: RunConfig) -> int:
        try:
            outcome = run_case(config)
        except SpecError:
            raise
        except LabError as err:
            self._logger.error(f"{config.label}: {err}")
            outcome = CaseOutcome.failure(config, err)

        if outcome.table is not None:
            columns, rows = outcome.table
            sys.stdout.write(to_csv(columns, rows))
        else:
            sys.stdout.write(to_json(document(outcome.to_dict())) + "\n")

        if self._output_dir is not None:
            exporter = ReportExporter(self._output_dir)
            for path in export_outcome(outcome, exporter, self._args.format):
                self._logger.info(f"Сохранён {path}")
        return EXIT_OK if outcome.passed else EXIT_FAILED

    def _run_report(self) -> int:
        cases = ManifestLoader().load(self._args.manifest)
        configs = [RunConfig.from_mapping(case) for case in cases]
        result = SuiteRunner(self._logger, self._args.workers).run(configs, self._on_progress)

        payload = document(result.to_dict())
        sys.stdout.write(to_json(payload) + "\n")

        output_dir = self._output_dir or settings.app_dir / "output"
        summary = export_suite(result, ReportExporter(output_dir))
        self._logger.info(f"Сводка сохранена: {summary}")
        return EXIT_OK if result.passed else EXIT_FAILED

    def _on_progress(self, progress: ProgressInfo) -> None:
        if progress.passed is not None:
            self._logger.info(f"{progress.message} ({progress.percentage:.0f}%)")


def main(argv: list[str] | None = None) -> int:
    """Главная функция."""
    return Application(argv).run()


if __name__ == "__main__":
    sys.exit(main())

"""
Прогон кейсов - главный оркестратор проверок.
Single Responsibility: координация разбора, вычислений и сборки вердиктов.

Каждая команда CLI - это один кейс; report прогоняет манифест кейсов в пуле потоков.
Ошибка одного кейса записывается в его исход и не прерывает прогон.
"""

from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from config.settings import settings
from core.analysis import (
    ExponentFit,
    decay_exponent,
    naive_constant_comparison,
    oscillation_exponent,
    pde_hypothesis_check,
    verify_2d_estimate,
    verify_err_corrected,
    verify_harmonic_pohozaev,
    verify_monotonicity,
    verify_poincare,
)
from core.coefficient import CoefficientField
from core.energy import energy_profile, parse_ladder, pohozaev_report, radius_ladder
from core.errors import DimensionMismatchError, InsufficientLadderError, LabError, SpecError
from core.exponent import (
    SWEEP_COLUMNS,
    crossover_ratio,
    eps_limit,
    exponent_bound,
    naive_chain_constant,
    optimize_eps_T,
    step5_objective,
    surface_to_bulk_constant,
    sweep,
)
from core.exporter import ReportExporter, document
from core.quadrature import QuadratureRule
from core.solutions import Solution
from core.solver import GridSolution, PolarGrid, convergence_study, grid_ladder, solve_dirichlet
from core.specs import dimension_hint, parse_boundary, parse_field, parse_solution, parse_sweep
from services.logger import AppLogger, get_logger
from services.progress import ProgressInfo, ProgressTracker

Plot = tuple[tuple[str, ...], np.ndarray]


@dataclass(frozen=True)
class RunConfig:
    """Все входные данные одного прогона; прогон воспроизводим по конфигурации и seed."""

    command: str
    name: str = ""
    field: str | None = None
    solution: str | None = None
    boundary: str | None = None
    n: int | None = None
    lam: float | None = None
    Lam: float | None = None
    nr: int | None = None
    ntheta: int | None = None
    nphi: int | None = None
    ladder: str | None = None
    tol: float | None = None
    resolution: int = settings.DEFAULT_RESOLUTION
    seed: int = settings.DEFAULT_SEED
    sweep: str | None = None
    count: int | None = None

    @classmethod
    def from_mapping(cls, case: dict) -> "RunConfig":
        """Конфигурация из кейса манифеста (ключи lambda/Lambda вместо lam/Lam)."""
        values = {key: value for key, value in case.items() if value is not None}
        kwargs = {
            "command": str(values["command"]),
            "name": str(values.get("name", values["command"])),
        }
        for key in ("field", "solution", "boundary", "ladder", "sweep"):
            if key in values:
                kwargs[key] = str(values[key])
        for key in ("n", "nr", "ntheta", "nphi", "resolution", "seed", "count"):
            if key in values:
                kwargs[key] = int(float(values[key]))
        for key, target in (("lambda", "lam"), ("Lambda", "Lam"), ("tol", "tol")):
            if key in values:
                kwargs[target] = float(values[key])
        return cls(**kwargs)

    @property
    def label(self) -> str:
        return self.name or self.command

    def to_dict(self) -> dict:
        out = asdict(self)
        out["lambda"], out["Lambda"] = out.pop("lam"), out.pop("Lam")
        return out


@dataclass
class CaseOutcome:
    """Исход кейса: вердикт, числа для JSON и данные для графиков."""

    config: RunConfig
    passed: bool
    result: dict = field(default_factory=dict)
    plots: dict[str, Plot] = field(default_factory=dict)
    table: tuple[tuple[str, ...], list[list]] | None = None
    error: str | None = None

    @classmethod
    def failure(cls, config: RunConfig, error: Exception) -> "CaseOutcome":
        return cls(config=config, passed=False, error=f"{type(error).__name__}: {error}")

    @property
    def name(self) -> str:
        return self.config.label

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "command": self.config.command,
            "passed": bool(self.passed),
            "config": self.config.to_dict(),
            "result": self.result,
            "error": self.error,
        }


@dataclass
class SuiteResult:
    """Исходы в порядке кейсов манифеста."""

    outcomes: list[CaseOutcome]

    @property
    def passed(self) -> bool:
        return all(outcome.passed for outcome in self.outcomes)

    @property
    def failed(self) -> list[str]:
        return [outcome.name for outcome in self.outcomes if not outcome.passed]

    @property
    def summary(self) -> str:
        total = len(self.outcomes)
        if self.passed:
            return f"Все кейсы пройдены: {total}"
        return f"Пройдено {total - len(self.failed)} из {total}. Провалены: {', '.join(self.failed)}"

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "total": len(self.outcomes),
            "failed": self.failed,
            "cases": [outcome.to_dict() for outcome in self.outcomes],
        }


# ---------------------------------------------------------------------------
# Разбор входа кейса
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Subject:
    """Поле, решение и правило, на которых считаются энергии."""

    field: CoefficientField
    solution: Solution
    rule: QuadratureRule
    grid_solution: GridSolution | None = None


def _require(config: RunConfig, *names: str) -> None:
    missing = [name for name in names if getattr(config, name) is None]
    if missing:
        keys = {"lam": "lambda", "Lam": "Lambda"}
        raise SpecError(
            f"Команде {config.command} не хватает параметров: "
            f"{', '.join(keys.get(name, name) for name in missing)}"
        )


def _field(config: RunConfig) -> CoefficientField:
    _require(config, "field")
    n = config.n or dimension_hint(config.solution, config.boundary)
    rng = np.random.default_rng(config.seed)
    return parse_field(config.field, n, config.lam, config.Lam, rng)


def _grid(config: RunConfig, n: int) -> PolarGrid:
    return PolarGrid.build(
        n,
        config.nr or settings.DEFAULT_NR,
        config.ntheta or settings.DEFAULT_NTHETA,
        config.nphi or settings.DEFAULT_NPHI,
        settings.RADIAL_GRADING,
    )


def _subject(config: RunConfig) -> _Subject:
    field = _field(config)
    if config.solution and config.boundary:
        raise SpecError("Заданы одновременно solution и boundary")
    if config.solution:
        sol = parse_solution(
            config.solution, field, config.n or field.n, np.random.default_rng(config.seed)
        )
        if sol.n != field.n:
            raise DimensionMismatchError(f"Поле размерности {field.n}, решение {sol.n}")
        return _Subject(field, sol, QuadratureRule.default(field.n, r_min=sol.r_min))
    if config.boundary:
        boundary = parse_boundary(config.boundary, field.n)
        grid_solution = solve_dirichlet(
            field, boundary, _grid(config, field.n), label=f"grid:{boundary.label}"
        )
        return _Subject(
            field, grid_solution.as_solution(), QuadratureRule.default(field.n), grid_solution
        )
    raise SpecError(f"Команде {config.command} нужно решение (--solution) или граничные данные (--boundary)")


def _is_identity(field: CoefficientField) -> bool:
    return field.descriptor.get("name") == "identity"


# ---------------------------------------------------------------------------
# Команды
# ---------------------------------------------------------------------------


def run_exponent(config: RunConfig) -> CaseOutcome:
    """
    Показатели по замкнутым формулам; с sweep - таблица по (n, λ/Λ).
    Частные случаи n = 2 и λ = Λ сверяются с α = √(λ/Λ), α = 1, α̃ = n.
    """
    tol = config.tol or settings.EXPONENT_TOL
    if config.sweep:
        ns, ratios = parse_sweep(config.sweep)
        bounds = sweep(ns, ratios)
        rows = [bound.sweep_row() for bound in bounds]
        gap = max(bound.closed_form_gap for bound in bounds)
        return CaseOutcome(
            config=config,
            passed=bool(np.all(np.isfinite(rows))) and gap <= tol,
            result={
                "columns": list(SWEEP_COLUMNS),
                "rows": [b.to_dict() for b in bounds],
                "closed_form_gap": gap,
                "tolerance": tol,
            },
            table=(SWEEP_COLUMNS, rows),
        )

    _require(config, "n", "lam", "Lam")
    bound = exponent_bound(config.n, config.lam, config.Lam)
    result = bound.to_dict()
    result["naive_chain_constant"] = naive_chain_constant(config.n)
    result["crossover_ratio"] = crossover_ratio(config.n)
    result["closed_form_gap"] = bound.closed_form_gap
    result["tolerance"] = tol
    return CaseOutcome(config=config, passed=bound.closed_form_gap <= tol, result=result)


def run_pohozaev(config: RunConfig) -> CaseOutcome:
    """Обобщённое тождество Похожаева; для A = I ещё и гармоническая форма."""
    subject = _subject(config)
    field, sol, rule = subject.field, subject.solution, subject.rule
    if subject.grid_solution is not None:
        tol = config.tol or settings.GRID_TOL
    elif rule.r_min > 0:
        tol = config.tol or settings.POHOZAEV_TRUNCATED_TOL
    else:
        tol = config.tol or settings.POHOZAEV_ANALYTIC_TOL

    report = pohozaev_report(field, sol, rule)
    hypothesis = pde_hypothesis_check(field, sol, rule)
    passed = report.relative_residual <= tol and hypothesis.passed
    result = {
        "pohozaev": report.to_dict(),
        "hypothesis": hypothesis.to_dict(),
        "tolerance": tol,
    }
    if subject.grid_solution is not None:
        result["solver"] = subject.grid_solution.to_dict()
    if _is_identity(field) and sol.is_analytic and rule.r_min == 0:
        harmonic = verify_harmonic_pohozaev(sol, rule, tol)
        result["harmonic"] = harmonic.to_dict()
        passed = passed and harmonic.passed
    return CaseOutcome(config=config, passed=bool(passed), result=result)


def _exponent_check(fit: ExponentFit, exact_alpha: float) -> dict:
    """Подгонки против точного показателя решения: α_osc ≈ α и α_implied ≈ α_osc."""
    osc_gap = abs(fit.alpha_osc - exact_alpha)
    return {
        "alpha": exact_alpha,
        "osc_gap": osc_gap,
        "osc_tolerance": settings.OSC_EXPONENT_TOL,
        "discrepancy": fit.discrepancy,
        "discrepancy_tolerance": settings.EXPONENT_CONSISTENCY_TOL,
        "passed": bool(
            osc_gap <= settings.OSC_EXPONENT_TOL
            and fit.discrepancy is not None
            and fit.discrepancy <= settings.EXPONENT_CONSISTENCY_TOL
        ),
    }


def run_monotonicity(config: RunConfig) -> CaseOutcome:
    """r·s(r) ≥ α̃·g(r) по лестнице, показатели убывания и осцилляции."""
    logger = get_logger()
    subject = _subject(config)
    field, sol, rule = subject.field, subject.solution, subject.rule
    analytic = subject.grid_solution is None
    tol = config.tol or (settings.ANALYTIC_TOL if analytic else settings.GRID_TOL)
    ladder = parse_ladder(config.ladder) if config.ladder else radius_ladder()

    alpha_tilde = surface_to_bulk_constant(field.n, field.lam, field.Lam)
    profile = energy_profile(field, sol, ladder, rule)
    verdict = verify_monotonicity(profile, alpha_tilde, tol)
    hypothesis = pde_hypothesis_check(field, sol, rule)
    passed = verdict.passed and hypothesis.passed
    result = {
        "alpha_tilde": alpha_tilde,
        "verdict": verdict.to_dict(),
        "profile": profile.to_dict(),
        "hypothesis": hypothesis.to_dict(),
    }

    if field.n == 2:
        estimate = verify_2d_estimate(profile, field.lam, field.Lam, tol)
        result["estimate_2d"] = estimate.to_dict()
        passed = passed and estimate.passed

    try:
        fit = decay_exponent(profile)
        if analytic:
            fit = fit.merged(oscillation_exponent(sol, ladder, seed=config.seed, rule=rule))
        result["exponents"] = fit.to_dict()
    except InsufficientLadderError as e:
        logger.info(f"{config.label}: подгонка показателей пропущена: {e}")
    else:
        exact_alpha = sol.metadata.get("alpha")
        if exact_alpha is not None and fit.alpha_osc is not None:
            check = _exponent_check(fit, float(exact_alpha))
            result["exponent_check"] = check
            passed = passed and check["passed"]

    if np.any(np.isclose(profile.radii, 1.0, rtol=0.0, atol=1e-12)):
        report = pohozaev_report(field, sol, rule)
        corrected = verify_err_corrected(report, profile, field.n, field.lam, field.Lam, tol)
        result["err_corrected"] = corrected.to_dict()
    if subject.grid_solution is not None:
        result["solver"] = subject.grid_solution.to_dict()

    plots = {
        "ratio": (("r", "ratio"), np.column_stack([profile.radii, profile.ratios])),
        "decay": (
            ("log_r", "log_g"),
            np.column_stack([np.log(profile.radii), np.log(profile.bulk)]),
        ),
    }
    return CaseOutcome(config=config, passed=bool(passed), result=result, plots=plots)


def run_optimize(config: RunConfig) -> CaseOutcome:
    """Перебор целевой функции по (ε, T) и сравнение с (ε*, nΛ)."""
    _require(config, "n", "lam", "Lam")
    optimum = optimize_eps_T(config.n, config.lam, config.Lam, config.resolution)
    limit = eps_limit(config.n, config.lam, config.Lam)
    eps = limit * np.arange(1, 201) / 200
    values = [step5_objective(e, optimum.T_star, config.n, config.lam, config.Lam) for e in eps]
    return CaseOutcome(
        config=config,
        passed=bool(optimum.passed),
        result=optimum.to_dict(),
        plots={"objective": (("eps", "objective"), np.column_stack([eps, values]))},
    )


def run_convergence(config: RunConfig) -> CaseOutcome:
    """Наблюдаемый порядок решателя по трём вложенным сеткам."""
    field = _field(config)
    _require(config, "boundary")
    boundary = parse_boundary(config.boundary, field.n)
    grids = grid_ladder(
        field.n,
        config.nr or settings.CONVERGENCE_NR,
        config.ntheta or settings.CONVERGENCE_NTHETA,
        config.nphi or settings.DEFAULT_NPHI,
        levels=settings.CONVERGENCE_LEVELS,
    )
    reference = boundary.harmonic_extension if _is_identity(field) else None
    report = convergence_study(field, boundary, grids, reference)
    tol = config.tol or settings.CONVERGENCE_ORDER_TOL
    passed = report.exact or abs(report.order - settings.CONVERGENCE_ORDER) <= tol
    result = report.to_dict()
    result["expected_order"] = settings.CONVERGENCE_ORDER
    result["tolerance"] = tol
    plots = {}
    if not report.exact:
        plots["convergence"] = (
            ("log_h", "log_error"),
            np.column_stack([np.log(report.steps), np.log(report.errors)]),
        )
    return CaseOutcome(config=config, passed=bool(passed), result=result, plots=plots)


def run_poincare(config: RunConfig) -> CaseOutcome:
    """Неравенство Пуанкаре на S_1."""
    _require(config, "solution")
    field = _field(config) if config.field else None
    sol = parse_solution(
        config.solution,
        field,
        config.n or dimension_hint(config.solution),
        np.random.default_rng(config.seed),
    )
    check = verify_poincare(
        sol, 1.0, QuadratureRule.default(sol.n), config.tol or settings.POINCARE_TOL
    )
    return CaseOutcome(config=config, passed=bool(check.passed), result=check.to_dict())


def run_naive(config: RunConfig) -> CaseOutcome:
    """Наивная константа 2√(n-1) против измеренного отношения для u = x₁."""
    _require(config, "n")
    comparison = naive_constant_comparison(config.n)
    tol = config.tol or settings.NAIVE_TOL
    result = comparison.to_dict()
    result["crossover_ratio"] = crossover_ratio(config.n)
    passed = abs(comparison.measured_ratio - config.n) <= tol * config.n
    return CaseOutcome(config=config, passed=bool(passed), result=result)


RUNNERS: dict[str, Callable[[RunConfig], CaseOutcome]] = {
    "exponent": run_exponent,
    "pohozaev": run_pohozaev,
    "monotonicity": run_monotonicity,
    "optimize": run_optimize,
    "convergence": run_convergence,
    "poincare": run_poincare,
    "naive": run_naive,
}


def run_case(config: RunConfig) -> CaseOutcome:
    """Выполнить кейс; ошибки разбора и вычислений пробрасываются."""
    runner = RUNNERS.get(config.command)
    if runner is None:
        raise SpecError(f"Неизвестная команда '{config.command}'; допустимы: {', '.join(RUNNERS)}")
    return runner(config)


def execute_case(config: RunConfig, logger: AppLogger | None = None) -> CaseOutcome:
    """Выполнить кейс с политикой манифеста: LabError превращается в проваленный исход."""
    logger = logger or get_logger()
    logger.info(f"Кейс {config.label} ({config.command}): старт")
    try:
        outcome = run_case(config)
    except LabError as e:
        logger.error(f"Кейс {config.label}: {e}")
        return CaseOutcome.failure(config, e)
    logger.info(f"Кейс {config.label}: {'пройден' if outcome.passed else 'провален'}")
    return outcome


# ---------------------------------------------------------------------------
# Пакетные кейсы
# ---------------------------------------------------------------------------

BATCH_DIMENSIONS = (2, 8)
BATCH_LAMBDA_RANGE = (0.5, 5.0)
BATCH_RATIO_RANGE = (0.05, 1.0)


def expand_case(config: RunConfig) -> list[RunConfig]:
    """
    Развернуть пакетный кейс (count) в count воспроизводимых кейсов.

    Генератор с seed пакета выдаёт каждому дочернему кейсу свой seed;
    незаданные n, λ, Λ команд exponent и optimize тянутся из него же.
    Кейс без count возвращается как есть.
    """
    if config.count is None:
        return [config]
    if config.count < 1:
        raise SpecError(f"count должен быть положительным: {config.count}")

    rng = np.random.default_rng(config.seed)
    width = len(str(config.count))
    draws_bounds = config.command in ("exponent", "optimize") and not config.sweep
    children = []
    for index in range(1, config.count + 1):
        changes = {
            "name": f"{config.label}-{index:0{width}d}",
            "count": None,
            "seed": int(rng.integers(0, 2**31 - 1)),
        }
        if draws_bounds and config.n is None:
            changes["n"] = int(rng.integers(BATCH_DIMENSIONS[0], BATCH_DIMENSIONS[1] + 1))
        if draws_bounds and (config.lam is None or config.Lam is None):
            Lam = float(rng.uniform(*BATCH_LAMBDA_RANGE))
            changes["lam"] = Lam * float(rng.uniform(*BATCH_RATIO_RANGE))
            changes["Lam"] = Lam
        children.append(replace(config, **changes))
    return children


# ---------------------------------------------------------------------------
# Пул кейсов
# ---------------------------------------------------------------------------


class SuiteRunner:
    """
    Прогон манифеста в пуле потоков.
    Исходы собираются в порядке кейсов, независимо от порядка завершения.
    """

    def __init__(self, logger: AppLogger | None = None, max_workers: int = settings.MAX_WORKERS):
        """
        Args:
            logger: Логгер
            max_workers: Число потоков пула
        """
        self._logger = logger or get_logger()
        self._max_workers = max(1, max_workers)

    def run(
        self,
        configs: list[RunConfig],
        progress_callback: Callable[[ProgressInfo], None] | None = None,
    ) -> SuiteResult:
        """
        Прогнать кейсы.

        Args:
            configs: Конфигурации кейсов в порядке манифеста; пакетные разворачиваются на месте
            progress_callback: Подписчик на прогресс

        Returns:
            Исходы в порядке развёрнутых конфигураций
        """
        configs = [child for config in configs for child in expand_case(config)]
        progress = ProgressTracker(progress_callback)
        progress.start(len(configs))
        outcomes: list[CaseOutcome | None] = [None] * len(configs)
        self._logger.info(f"Прогон {len(configs)} кейсов, потоков: {self._max_workers}")

        with ThreadPoolExecutor(max_workers=self._max_workers) as executor:
            futures = {
                executor.submit(execute_case, config, self._logger): index
                for index, config in enumerate(configs)
            }
            for future in as_completed(futures):
                index = futures[future]
                try:
                    outcome = future.result()
                except Exception as e:
                    self._logger.error(f"Кейс {configs[index].label}: непредвиденная ошибка: {e}")
                    outcome = CaseOutcome.failure(configs[index], e)
                outcomes[index] = outcome
                progress.advance(outcome.name, outcome.passed)

        result = SuiteResult(outcomes=outcomes)
        self._logger.info(result.summary)
        return result


# ---------------------------------------------------------------------------
# Экспорт
# ---------------------------------------------------------------------------


def export_outcome(
    outcome: CaseOutcome, exporter: ReportExporter, table_format: str = "csv"
) -> list[Path]:
    """JSON отчёт кейса, файлы графиков и таблица развёртки."""
    paths = [exporter.write_json(document(outcome.to_dict()), outcome.name)]
    for plot_name, (columns, data) in outcome.plots.items():
        paths.append(exporter.write_plot(f"{outcome.name}_{plot_name}", columns, data))
    if outcome.table is not None:
        columns, rows = outcome.table
        paths.append(exporter.write_table(f"{outcome.name}_sweep", columns, rows, table_format))
    return paths


def export_suite(result: SuiteResult, exporter: ReportExporter) -> Path:
    """Сводный JSON и графики всех кейсов."""
    for outcome in result.outcomes:
        for plot_name, (columns, data) in outcome.plots.items():
            exporter.write_plot(f"{outcome.name}_{plot_name}", columns, data)
        if outcome.table is not None:
            columns, rows = outcome.table
            exporter.write_table(f"{outcome.name}_sweep", columns, rows)
    return exporter.write_json(document(result.to_dict()), "summary")

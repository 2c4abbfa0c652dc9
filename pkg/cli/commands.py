"""
Подкоманды командной строки.
Single Responsibility: только описание флагов и перевод аргументов в RunConfig.
"""

import argparse
from pathlib import Path

from config.settings import settings
from core.suite import RUNNERS, RunConfig

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

COMMAND_HELP = {
    "exponent": "показатели α и α̃ по формулам; --sweep строит таблицу",
    "pohozaev": "обобщённое тождество Похожаева на B_1",
    "monotonicity": "неравенство r·s(r) ≥ α̃·g(r) по лестнице радиусов",
    "optimize": "перебор целевой функции по (ε, T)",
    "convergence": "наблюдаемый порядок решателя на трёх сетках",
    "poincare": "неравенство Пуанкаре на единичной сфере",
    "naive": "наивная константа 2√(n-1) против измеренного отношения",
}


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="подробный лог (DEBUG)")
    common.add_argument("--log", type=Path, default=None, help="файл лога (иначе ELAB_LOG)")
    common.add_argument(
        "--out", type=Path, default=None, help="папка для отчётов (ELAB_OUT имеет приоритет)"
    )
    return common


def _case_options() -> argparse.ArgumentParser:
    case = argparse.ArgumentParser(add_help=False)
    case.add_argument("--name", default="", help="имя кейса в отчёте")
    case.add_argument("--field", help="поле: identity, const:diag(1,4), const:random, ps2d:1,4, ...")
    case.add_argument("--solution", help="решение: affine, harmonic:n=3,k=2,i=0, ps2d, norm2")
    case.add_argument("--boundary", help='граничные данные для решателя, например "cos(2*theta)"')
    case.add_argument("-n", type=int, default=None, help="размерность")
    case.add_argument("--lambda", dest="lam", type=float, default=None, help="нижняя граница λ")
    case.add_argument("--Lambda", dest="Lam", type=float, default=None, help="верхняя граница Λ")
    case.add_argument("--nr", type=int, default=None, help="узлов по радиусу")
    case.add_argument("--ntheta", type=int, default=None, help="узлов по θ")
    case.add_argument("--nphi", type=int, default=None, help="узлов по φ (n = 3)")
    case.add_argument("--ladder", help='лестница радиусов: "0.1..1.0x12", "lin:0.5..1x26" или список')
    case.add_argument("--tol", type=float, default=None, help="допуск вердикта")
    case.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    case.add_argument("--resolution", type=int, default=settings.DEFAULT_RESOLUTION)
    case.add_argument("--sweep", help='развёртка: "n=2..8,ratio=0.1..1.0x10"')
    case.add_argument(
        "--format", choices=("csv", "xlsx"), default="csv", help="формат файла развёртки"
    )
    return case


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="elab",
        description="Лаборатория проверки гёльдеровой регулярности для -div(A∇u) = 0",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    common, case = _common_options(), _case_options()

    for name in RUNNERS:
        commands.add_parser(name, parents=[common, case], help=COMMAND_HELP[name])

    report = commands.add_parser(
        "report", parents=[common], help="прогон манифеста кейсов со сводным отчётом"
    )
    report.add_argument(
        "--manifest",
        default="paper-suite",
        help="встроенный манифест (paper-suite), путь к .json или .xlsx",
    )
    report.add_argument("--workers", type=int, default=settings.MAX_WORKERS)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """RunConfig одной подкоманды."""
    return RunConfig(
        command=args.command,
        name=args.name,
        field=args.field,
        solution=args.solution,
        boundary=args.boundary,
        n=args.n,
        lam=args.lam,
        Lam=args.Lam,
        nr=args.nr,
        ntheta=args.ntheta,
        nphi=args.nphi,
        ladder=args.ladder,
        tol=args.tol,
        resolution=args.resolution,
        seed=args.seed,
        sweep=args.sweep,
    )

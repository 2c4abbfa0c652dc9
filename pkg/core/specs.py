"""
Разбор строковых дескрипторов полей, решений, граничных данных и развёрток.
Single Responsibility: только разбор и валидация входных описаний.
"""

import json
import re
from dataclasses import dataclass

import numpy as np

from config.settings import settings
from core.coefficient import (
    CoefficientField,
    constant,
    from_descriptor,
    identity,
    layered,
    ps2d,
    radial,
    random_constant,
)
from core.errors import LabError, SpecError
from core.solutions import (
    Solution,
    affine,
    combination,
    harmonic_basis,
    harmonic_polynomial,
    norm_squared,
    ps_example,
)
from core.solver import BoundaryData

DEFAULT_RANDOM_BOUNDS = (1.0, 4.0)


def _options(text: str) -> dict[str, str]:
    """Разобрать "a=1,b=2" в словарь; пустая строка даёт пустой словарь."""
    options = {}
    for chunk in filter(None, (part.strip() for part in text.split(","))):
        key, sep, value = chunk.partition("=")
        if not sep:
            raise SpecError(f"Ожидалось key=value, получено '{chunk}'")
        options[key.strip()] = value.strip()
    return options


def _number(options: dict[str, str], key: str, default=None) -> float:
    if key not in options:
        if default is None:
            raise SpecError(f"Не задан параметр {key}")
        return float(default)
    try:
        return float(options[key])
    except ValueError:
        raise SpecError(f"Параметр {key} должен быть числом: {options[key]}")


# ---------------------------------------------------------------------------
# Поля
# ---------------------------------------------------------------------------


def parse_field(
    spec: str,
    n: int | None = None,
    lam: float | None = None,
    Lam: float | None = None,
    rng: np.random.Generator | None = None,
) -> CoefficientField:
    """
    Разобрать дескриптор поля.

    Args:
        spec: "identity", "const:diag(1,4)", "const:[[1,0],[0,4]]", "const:random",
            "ps2d:1,4", "ps2d:lambda=1,Lambda=4", "radial:n=2,eps=0.1",
            "layered:n=3,eps=0.5" или JSON дескриптор
        n: размерность для полей, которые её не задают
        lam, Lam: границы для "const:random"
        rng: генератор для "const:random"

    Returns:
        Поле коэффициентов
    """
    text = spec.strip()
    name, _, rest = text.partition(":")
    try:
        if text.startswith("{"):
            return from_descriptor(json.loads(text))
        if name == "identity":
            options = _options(rest)
            return identity(int(_number(options, "n", n or 2)))
        if name == "const":
            return _parse_constant(rest, n, lam, Lam, rng)
        if name == "ps2d":
            if "=" in rest:
                options = _options(rest)
                return ps2d(_number(options, "lambda"), _number(options, "Lambda"))
            values = [float(v) for v in rest.split(",")] if rest else [lam or 1.0, Lam or 4.0]
            if len(values) != 2:
                raise SpecError(f"ps2d ожидает два числа λ,Λ: '{rest}'")
            return ps2d(*values)
        if name in ("radial", "layered"):
            options = _options(rest)
            builder = radial if name == "radial" else layered
            return builder(int(_number(options, "n", n or 2)), _number(options, "eps"))
    except json.JSONDecodeError as e:
        raise SpecError(f"Некорректный JSON дескриптор поля: {e}")
    except LabError:
        raise
    except ValueError as e:
        raise SpecError(f"Некорректный дескриптор поля '{spec}': {e}")
    raise SpecError(
        f"Неизвестное поле '{spec}'. Поддерживаются: identity, const:..., ps2d, radial, layered"
    )


def _parse_constant(rest, n, lam, Lam, rng) -> CoefficientField:
    if rest == "random":
        low, high = (lam, Lam) if lam is not None and Lam is not None else DEFAULT_RANDOM_BOUNDS
        generator = rng or np.random.default_rng(settings.DEFAULT_SEED)
        return random_constant(n or 2, low, high, generator)
    match = re.fullmatch(r"diag\((.*)\)", rest)
    if match:
        diagonal = [float(v) for v in match.group(1).split(",")]
        return constant(np.diag(diagonal), lam, Lam, name=f"const:diag({match.group(1)})")
    if rest.startswith("["):
        return constant(json.loads(rest), lam, Lam)
    raise SpecError(f"Некорректная постоянная матрица: '{rest}'")


# ---------------------------------------------------------------------------
# Решения
# ---------------------------------------------------------------------------


def parse_solution(
    spec: str,
    field: CoefficientField | None = None,
    n: int | None = None,
    rng: np.random.Generator | None = None,
) -> Solution:
    """
    Разобрать дескриптор аналитического решения.

    Args:
        spec: "affine", "affine:1,2", "harmonic:n=2,k=2,i=1", "ps2d",
            "ps2d:lambda=1,Lambda=4", "norm2", "norm2:n=3", "random:n=2,k=3"
        field: поле кейса; задаёт размерность и параметры ps2d по умолчанию
        n: размерность, если поля нет
        rng: генератор весов для "random"

    Returns:
        Решение
    """
    text = spec.strip()
    name, _, rest = text.partition(":")
    dimension = n or (field.n if field is not None else 2)
    try:
        if name == "affine":
            if not rest:
                return affine(dimension)
            slope = [float(v) for v in rest.split(",")]
            return affine(len(slope), slope)
        if name == "harmonic":
            options = _options(rest)
            return harmonic_polynomial(
                int(_number(options, "n", dimension)),
                int(_number(options, "k")),
                int(_number(options, "i", 0)),
            )
        if name == "ps2d":
            if rest:
                options = _options(rest)
                return ps_example(_number(options, "lambda"), _number(options, "Lambda"))[1]
            if field is None or field.descriptor.get("name") != "ps2d":
                raise SpecError("Решение ps2d без параметров требует поля ps2d")
            return ps_example(field.lam, field.Lam)[1]
        if name == "norm2":
            options = _options(rest)
            return norm_squared(int(_number(options, "n", dimension)))
        if name == "random":
            options = _options(rest)
            return _random_harmonic(
                int(_number(options, "n", dimension)), int(_number(options, "k", 3)), rng
            )
    except LabError:
        raise
    except ValueError as e:
        raise SpecError(f"Некорректный дескриптор решения '{spec}': {e}")
    raise SpecError(
        f"Неизвестное решение '{spec}'. Поддерживаются: affine, harmonic, ps2d, norm2, random"
    )


def _random_harmonic(n: int, degree: int, rng: np.random.Generator | None) -> Solution:
    """Гармоническая комбинация степеней 1..k со стандартными нормальными весами."""
    if degree < 1:
        raise SpecError(f"Степень случайного следа должна быть не меньше 1: {degree}")
    generator = rng or np.random.default_rng(settings.DEFAULT_SEED)
    basis = [member for k in range(1, degree + 1) for member in harmonic_basis(n, k)]
    weights = generator.standard_normal(len(basis))
    return combination(basis, weights, name=f"random:n={n},k={degree}")


# ---------------------------------------------------------------------------
# Граничные данные
# ---------------------------------------------------------------------------

_TRIG = re.compile(r"(cos|sin)\((?:(\d+)\*)?(theta|phi)\)")
_COORDINATE = re.compile(r"x([1-3])")
_TERM = re.compile(r"([+-]?)\s*([^+-]+)")


@dataclass(frozen=True)
class _Factor:
    kind: str  # "number" | "trig" | "coordinate"
    value: float = 1.0
    function: str = ""
    multiple: int = 1
    angle: str = ""
    axis: int = 0


def _parse_factor(text: str, n: int) -> _Factor:
    token = text.strip()
    trig = _TRIG.fullmatch(token)
    if trig:
        if trig.group(3) == "phi" and n != 3:
            raise SpecError(f"Угол phi доступен только при n = 3: '{token}'")
        return _Factor(
            "trig", function=trig.group(1), multiple=int(trig.group(2) or 1), angle=trig.group(3)
        )
    coordinate = _COORDINATE.fullmatch(token)
    if coordinate:
        axis = int(coordinate.group(1)) - 1
        if axis >= n:
            raise SpecError(f"Координата {token} вне размерности {n}")
        return _Factor("coordinate", axis=axis)
    try:
        return _Factor("number", value=float(token))
    except ValueError:
        raise SpecError(f"Неизвестный множитель в граничных данных: '{token}'")


def _angles(points: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
    theta = np.arctan2(points[:, 1], points[:, 0])
    if points.shape[1] == 2:
        return theta, None
    radius = np.linalg.norm(points, axis=1)
    return theta, np.arccos(np.clip(points[:, 2] / radius, -1.0, 1.0))


def parse_boundary(spec: str, n: int) -> BoundaryData:
    """
    Граничные данные на S_1: сумма членов вида
    [число*]множитель[*множитель...], где множитель - cos(k*theta), sin(theta),
    cos(phi) (только n = 3), x1, x2, x3 или число.

    Гармоническое продолжение (точное решение при A = I) строится, если каждый
    член - константа, координата или одна тригонометрическая функция от theta при n = 2.
    """
    text = spec.replace(" ", "")
    if not text:
        raise SpecError("Пустые граничные данные")
    terms: list[tuple[float, list[_Factor]]] = []
    position = 0
    for match in _TERM.finditer(text):
        if match.start() != position:
            raise SpecError(f"Некорректные граничные данные: '{spec}'")
        position = match.end()
        sign = -1.0 if match.group(1) == "-" else 1.0
        factors = [_parse_factor(part, n) for part in _split_factors(match.group(2))]
        terms.append((sign, factors))
    if position != len(text):
        raise SpecError(f"Некорректные граничные данные: '{spec}'")

    def evaluate(points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        theta, phi = _angles(pts)
        total = np.zeros(pts.shape[0])
        for sign, factors in terms:
            value = np.full(pts.shape[0], sign)
            for factor in factors:
                value = value * _factor_values(factor, pts, theta, phi)
            total += value
        return total

    return BoundaryData(
        fn=evaluate,
        label=spec,
        n=n,
        harmonic_extension=_harmonic_extension(terms, n),
    )


def _split_factors(raw: str) -> list[str]:
    """Разбить член по знакам умножения вне скобок."""
    parts, depth, current = [], 0, ""
    for char in raw:
        if char == "(":
            depth += 1
        elif char == ")":
            depth -= 1
        if char == "*" and depth == 0:
            parts.append(current)
            current = ""
        else:
            current += char
    parts.append(current)
    return parts


def _factor_values(factor: _Factor, pts: np.ndarray, theta: np.ndarray, phi) -> np.ndarray:
    if factor.kind == "number":
        return np.full(pts.shape[0], factor.value)
    if factor.kind == "coordinate":
        return pts[:, factor.axis]
    angle = theta if factor.angle == "theta" else phi
    function = np.cos if factor.function == "cos" else np.sin
    return function(factor.multiple * angle)


def _harmonic_extension(terms, n: int):
    pieces = []
    for sign, factors in terms:
        scale = sign * np.prod([f.value for f in factors if f.kind == "number"])
        others = [f for f in factors if f.kind != "number"]
        if not others:
            pieces.append((scale, None))
        elif len(others) == 1 and others[0].kind == "coordinate":
            pieces.append((scale, others[0]))
        elif len(others) == 1 and n == 2 and others[0].angle == "theta":
            pieces.append((scale, others[0]))
        else:
            return None

    def extension(points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        radius = np.linalg.norm(pts, axis=1)
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        total = np.zeros(pts.shape[0])
        for scale, factor in pieces:
            if factor is None:
                total += scale
            elif factor.kind == "coordinate":
                total += scale * pts[:, factor.axis]
            else:
                function = np.cos if factor.function == "cos" else np.sin
                total += scale * radius**factor.multiple * function(factor.multiple * theta)
        return total

    return extension


# ---------------------------------------------------------------------------
# Развёртка показателей
# ---------------------------------------------------------------------------


def parse_sweep(spec: str) -> tuple[list[int], list[float]]:
    """
    "n=2..8,ratio=0.1..1.0x10": целые n включительно и равномерные λ/Λ с числом точек.
    """
    options = _options(spec)
    if set(options) != {"n", "ratio"}:
        raise SpecError(f"Развёртка должна задавать ровно n и ratio: '{spec}'")
    try:
        n_low, n_high = (int(v) for v in options["n"].split(".."))
        bounds, _, count = options["ratio"].partition("x")
        r_low, r_high = (float(v) for v in bounds.split(".."))
        count = int(count) if count else 10
    except ValueError:
        raise SpecError(f"Некорректная развёртка: '{spec}'")
    if n_low < 2 or n_high < n_low:
        raise SpecError(f"Диапазон n должен удовлетворять 2 ≤ n_min ≤ n_max: '{options['n']}'")
    if not 0 < r_low <= r_high <= 1.0 or count < 1:
        raise SpecError(f"Диапазон λ/Λ должен лежать в (0, 1]: '{options['ratio']}'")
    return list(range(n_low, n_high + 1)), np.linspace(r_low, r_high, count).tolist()


def dimension_hint(solution: str | None = None, boundary: str | None = None) -> int | None:
    """Размерность, которую задаёт сам дескриптор решения или граничных данных."""
    if solution:
        name, _, rest = solution.strip().partition(":")
        match = re.search(r"(?:^|,)\s*n\s*=\s*(\d+)", rest)
        if match:
            return int(match.group(1))
        if name == "affine" and rest:
            return len(rest.split(","))
        if name == "ps2d":
            return 2
    if boundary and ("phi" in boundary or "x3" in boundary):
        return 3
    return None

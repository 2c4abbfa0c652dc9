"""
Показатели Гёльдера и оптимизация по (ε, T).
Single Responsibility: замкнутые формулы и перебор по сетке, без квадратур.

Замкнутые формулы допускают вещественное n ≥ 2 (для графиков),
оптимизатор требует целого n.
"""

from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np

from config.settings import settings
from core.coefficient import check_bounds
from core.errors import DomainError

# Допуск на концах допустимого прямоугольника
_EDGE = 1e-12


def _check_arguments(n: float, lam: float, Lam: float) -> None:
    if not np.isfinite(n) or n < 2:
        raise DomainError(f"Размерность должна быть не меньше 2: {n}")
    check_bounds(lam, Lam)


def _check_integer_dimension(n: float) -> int:
    if float(n) != int(n):
        raise DomainError(f"Оптимизатор работает только с целым n: {n}")
    return int(n)


def surface_to_bulk_constant(n: float, lam: float, Lam: float) -> float:
    """α̃ = √((n-2)² + 4(n-1)λ/Λ)."""
    _check_arguments(n, lam, Lam)
    return float(np.sqrt((n - 2) ** 2 + 4.0 * (n - 1) * lam / Lam))


def holder_exponent(n: float, lam: float, Lam: float) -> float:
    """α = (α̃ - (n-2))/2; при n = 2 равен √(λ/Λ)."""
    return 0.5 * (surface_to_bulk_constant(n, lam, Lam) - (n - 2))


def eps_star(n: float, lam: float, Lam: float) -> float:
    return 0.5 * Lam * (surface_to_bulk_constant(n, lam, Lam) - (n - 2))


def eps_limit(n: float, lam: float, Lam: float) -> float:
    """Верхняя граница допустимых ε: √((n-1)λΛ), на ней c(ε) = 0."""
    _check_arguments(n, lam, Lam)
    return float(np.sqrt((n - 1) * lam * Lam))


def err_correction_coefficient(n: float, lam: float, Lam: float) -> float:
    """(n-2)/(Λ·α̃): вес err в уточнённой оценке; ноль при n = 2."""
    return (n - 2) / (Lam * surface_to_bulk_constant(n, lam, Lam))


def naive_chain_constant(n: float) -> float:
    """2√(n-1): константа наивной цепочки оценок через Пуанкаре и Коши - Буняковского."""
    if n < 2:
        raise DomainError(f"Размерность должна быть не меньше 2: {n}")
    return float(2.0 * np.sqrt(n - 1))


def crossover_ratio(n: float) -> float:
    """
    λ/Λ, выше которого 2√(n-1) < α̃; обрезано до [0, 1].
    При n ≥ 7 равно 0: наивная константа проигрывает при любом отношении.
    """
    if n < 2:
        raise DomainError(f"Размерность должна быть не меньше 2: {n}")
    return float(np.clip(1.0 - (n - 2) ** 2 / (4.0 * (n - 1)), 0.0, 1.0))


# ---------------------------------------------------------------------------
# Целевая функция по (ε, T)
# ---------------------------------------------------------------------------


def _c(eps: np.ndarray, n: float, lam: float, Lam: float) -> np.ndarray:
    return 1.0 / (2.0 * eps) - eps / (2.0 * (n - 1) * lam * Lam)


def _objective(eps: np.ndarray, T: np.ndarray, n: float, lam: float, Lam: float) -> np.ndarray:
    c = _c(eps, n, lam, Lam)
    numerator = 1.0 - c * (2.0 * Lam - T) / 2.0
    denominator = eps / (2.0 * (n - 1) * lam) + c * Lam / 2.0
    return numerator / denominator


def step5_objective(eps: float, T: float, n: float, lam: float, Lam: float) -> float:
    """
    [1 - c(ε)(2Λ-T)/2] / [ε/(2(n-1)λ) + c(ε)Λ/2],  c(ε) = 1/(2ε) - ε/(2(n-1)λΛ).
    Определена на 0 < ε ≤ √((n-1)λΛ), nλ ≤ T ≤ nΛ.
    """
    limit = eps_limit(n, lam, Lam)
    if not 0 < eps <= limit * (1 + _EDGE):
        raise DomainError(f"ε={eps} вне (0, {limit:.6g}]")
    if not n * lam * (1 - _EDGE) <= T <= n * Lam * (1 + _EDGE):
        raise DomainError(f"T={T} вне [{n * lam:g}, {n * Lam:g}]")
    return float(_objective(np.asarray(eps), np.asarray(T), n, lam, Lam))


def remark_coefficient(eps: float, n: float, lam: float, Lam: float) -> float:
    """
    Вес err в оценке с учётом err при произвольном ε:
    (c(ε)/2) / (ε/(2(n-1)λ) + c(ε)Λ/2). В ε* совпадает с err_correction_coefficient.
    """
    limit = eps_limit(n, lam, Lam)
    if not 0 < eps <= limit * (1 + _EDGE):
        raise DomainError(f"ε={eps} вне (0, {limit:.6g}]")
    c = _c(eps, n, lam, Lam)
    return float((c / 2.0) / (eps / (2.0 * (n - 1) * lam) + c * Lam / 2.0))


@dataclass(frozen=True)
class OptimizerResult:
    """Argmax перебора по сетке и замкнутая форма для сравнения."""

    n: int
    lam: float
    Lam: float
    resolution: int
    eps_hat: float
    T_hat: float
    value_hat: float
    eps_step: float
    eps_star: float
    T_star: float
    alpha_tilde: float
    increasing_in_T: bool

    @property
    def eps_error_in_steps(self) -> float:
        return abs(self.eps_hat - self.eps_star) / self.eps_step

    @property
    def value_error(self) -> float:
        return abs(self.value_hat - self.alpha_tilde)

    @property
    def passed(self) -> bool:
        return (
            self.eps_error_in_steps <= 2.0
            and np.isclose(self.T_hat, self.T_star, rtol=1e-12, atol=0.0)
            and self.value_error <= 1e-3
        )

    def to_dict(self) -> dict:
        out = asdict(self)
        out["lambda"], out["Lambda"] = out.pop("lam"), out.pop("Lam")
        out["eps_error_in_steps"] = self.eps_error_in_steps
        out["value_error"] = self.value_error
        out["passed"] = bool(self.passed)
        out["increasing_in_T"] = bool(self.increasing_in_T)
        return out


def optimize_eps_T(
    n: int, lam: float, Lam: float, resolution: int = settings.DEFAULT_RESOLUTION
) -> OptimizerResult:
    """
    Перебор целевой функции на сетке ε_k = ε_max·k/res, k = 1..res,
    и res равномерных значений T на [nλ, nΛ] (одно значение при λ = Λ).
    """
    n = _check_integer_dimension(n)
    _check_arguments(n, lam, Lam)
    if resolution < 100:
        raise DomainError(f"Разрешение сетки должно быть не меньше 100: {resolution}")

    limit = eps_limit(n, lam, Lam)
    eps_grid = limit * np.arange(1, resolution + 1) / resolution
    T_grid = np.array([n * Lam]) if lam == Lam else np.linspace(n * lam, n * Lam, resolution)
    values = _objective(eps_grid[:, None], T_grid[None, :], n, lam, Lam)
    # При c(ε) = 0 функция не зависит от T: из равных максимумов берётся наибольшее T
    best = values.max()
    near = values >= best - 1e-12 * abs(best)
    col = int(np.flatnonzero(near.any(axis=0)).max())
    row = int(np.argmax(values[:, col]))
    along_T = values[row]

    return OptimizerResult(
        n=n,
        lam=float(lam),
        Lam=float(Lam),
        resolution=resolution,
        eps_hat=float(eps_grid[row]),
        T_hat=float(T_grid[col]),
        value_hat=float(values[row, col]),
        eps_step=float(limit / resolution),
        eps_star=eps_star(n, lam, Lam),
        T_star=float(n * Lam),
        alpha_tilde=surface_to_bulk_constant(n, lam, Lam),
        increasing_in_T=bool(np.all(np.diff(along_T) >= -1e-12)),
    )


# ---------------------------------------------------------------------------
# Сводка показателей
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentBound:
    n: float
    lam: float
    Lam: float
    alpha: float
    alpha_tilde: float
    eps_star: float
    T_star: float
    err_coefficient: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "lambda": self.lam,
            "Lambda": self.Lam,
            "alpha": self.alpha,
            "alpha_tilde": self.alpha_tilde,
            "eps_star": self.eps_star,
            "T_star": self.T_star,
            "err_coefficient": self.err_coefficient,
        }

    def sweep_row(self) -> list[float]:
        return [self.n, self.lam, self.Lam, self.alpha, self.alpha_tilde, self.eps_star]

    @property
    def closed_form_gap(self) -> float:
        """Отклонение от частных случаев: α = √(λ/Λ) при n = 2; α = 1 и α̃ = n при λ = Λ."""
        gaps = [0.0]
        if self.n == 2:
            gaps.append(abs(self.alpha - np.sqrt(self.lam / self.Lam)))
        if self.lam == self.Lam:
            gaps.extend([abs(self.alpha - 1.0), abs(self.alpha_tilde - self.n)])
        return float(max(gaps))


SWEEP_COLUMNS = ("n", "lambda", "Lambda", "alpha", "alpha_tilde", "eps_star")


def exponent_bound(n: float, lam: float, Lam: float) -> ExponentBound:
    return ExponentBound(
        n=n,
        lam=float(lam),
        Lam=float(Lam),
        alpha=holder_exponent(n, lam, Lam),
        alpha_tilde=surface_to_bulk_constant(n, lam, Lam),
        eps_star=eps_star(n, lam, Lam),
        T_star=float(n * Lam),
        err_coefficient=err_correction_coefficient(n, lam, Lam),
    )


def sweep(ns: Iterable[float], ratios: Iterable[float], Lam: float = 1.0) -> list[ExponentBound]:
    """Таблица по всем парам (n, λ/Λ) с λ = ratio·Λ; порядок - n, затем ratio."""
    ratio_list = [float(r) for r in ratios]
    return [exponent_bound(n, ratio * Lam, Lam) for n in ns for ratio in ratio_list]

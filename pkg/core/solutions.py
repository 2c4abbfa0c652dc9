"""
Аналитические семейства решений -div(A∇u) = 0 с точными градиентами.
Single Responsibility: решения, их градиенты и разностная проверка уравнения.
"""

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from config.settings import settings
from core.coefficient import CoefficientField, as_points, check_bounds, polar_frames, ps2d
from core.errors import DimensionMismatchError, DomainError, UnsupportedFamilyError

ScalarEvaluator = Callable[[np.ndarray], np.ndarray]
GradientEvaluator = Callable[[np.ndarray], np.ndarray]

Term = tuple[float, tuple[int, ...]]


@dataclass(frozen=True, eq=False)
class Solution:
    """
    Скалярное поле u с доступом к ∇u.

    provenance: "analytic" (замкнутая формула) или "grid" (выход решателя).
    r_min: рекомендуемый радиус усечения квадратур для решений,
    которые у нуля лишь гёльдеровы; core_bulk_energy(r) - точная энергия
    ядра B_r, если она известна.
    """

    n: int
    value_fn: ScalarEvaluator
    gradient_fn: GradientEvaluator
    provenance: str = "analytic"
    degree: float | None = None
    name: str = "custom"
    singular_at_origin: bool = False
    r_min: float = 0.0
    core_bulk_energy: Callable[[float], float] | None = None
    metadata: dict = field(default_factory=dict)

    def _points(self, points: np.ndarray) -> tuple[np.ndarray, bool]:
        pts, single = as_points(points, self.n)
        if self.singular_at_origin and np.any(np.linalg.norm(pts, axis=1) == 0.0):
            raise DomainError(f"Решение {self.name} не определено в начале координат")
        return pts, single

    def value(self, points: np.ndarray) -> np.ndarray:
        pts, single = self._points(points)
        out = self.value_fn(pts)
        return out[0] if single else out

    def gradient(self, points: np.ndarray) -> np.ndarray:
        pts, single = self._points(points)
        out = self.gradient_fn(pts)
        return out[0] if single else out

    @property
    def is_analytic(self) -> bool:
        return self.provenance == "analytic"


# ---------------------------------------------------------------------------
# Многочлены
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Polynomial:
    """Многочлен как набор мономов (коэффициент, показатели)."""

    n: int
    terms: tuple[Term, ...]

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        out = np.zeros(pts.shape[0])
        for coef, exps in self.terms:
            out += coef * np.prod(pts ** np.asarray(exps), axis=1)
        return out

    def derivative(self, axis: int) -> "Polynomial":
        terms = []
        for coef, exps in self.terms:
            if exps[axis] == 0:
                continue
            lowered = list(exps)
            lowered[axis] -= 1
            terms.append((coef * exps[axis], tuple(lowered)))
        return Polynomial(self.n, tuple(terms))

    @property
    def degrees(self) -> set[int]:
        return {sum(exps) for coef, exps in self.terms if coef != 0}

    @property
    def homogeneous_degree(self) -> int | None:
        degrees = self.degrees
        return degrees.pop() if len(degrees) == 1 else None


def polynomial(n: int, terms: Sequence[Term], name: str = "polynomial") -> Solution:
    """Решение-многочлен с точным градиентом (уравнению может и не удовлетворять)."""
    for _, exps in terms:
        if len(exps) != n:
            raise DimensionMismatchError(
                f"Моном {exps} не соответствует размерности {n}"
            )
    poly = Polynomial(n, tuple((float(c), tuple(int(e) for e in exps)) for c, exps in terms))
    partials = [poly.derivative(i) for i in range(n)]

    def gradient(pts: np.ndarray) -> np.ndarray:
        return np.stack([p(pts) for p in partials], axis=1)

    return Solution(
        n=n,
        value_fn=poly,
        gradient_fn=gradient,
        degree=poly.homogeneous_degree,
        name=name,
        metadata={"terms": [[c, list(e)] for c, e in poly.terms]},
    )


def affine(n: int, gradient: Sequence[float] | None = None, offset: float = 0.0) -> Solution:
    """u = ⟨b, x⟩ + c; решает любое уравнение с постоянной A. По умолчанию u = x₁."""
    slope = np.zeros(n) if gradient is None else np.asarray(gradient, dtype=float)
    if gradient is None:
        slope[0] = 1.0
    if slope.shape != (n,):
        raise DimensionMismatchError(f"Градиент аффинной функции должен иметь длину {n}")
    terms: list[Term] = [
        (float(b), tuple(int(i == j) for j in range(n))) for i, b in enumerate(slope) if b
    ]
    if offset:
        terms.append((float(offset), (0,) * n))
    return polynomial(n, terms, name="affine")


def norm_squared(n: int) -> Solution:
    """u = |x|²: не решение (Δu = 2n), служит отрицательным примером."""
    terms = [(1.0, tuple(2 * int(i == j) for j in range(n))) for i in range(n)]
    return polynomial(n, terms, name="norm2")


# Базис гармонических многочленов; порядок внутри степени фиксирован
_HARMONIC_BASIS: dict[int, dict[int, list[tuple[Term, ...]]]] = {
    2: {
        0: [((1, (0, 0)),)],
        1: [((1, (1, 0)),), ((1, (0, 1)),)],
        2: [((1, (2, 0)), (-1, (0, 2))), ((1, (1, 1)),)],
        3: [((1, (3, 0)), (-3, (1, 2))), ((3, (2, 1)), (-1, (0, 3)))],
    },
    3: {
        0: [((1, (0, 0, 0)),)],
        1: [((1, (1, 0, 0)),), ((1, (0, 1, 0)),), ((1, (0, 0, 1)),)],
        2: [
            ((1, (1, 1, 0)),),
            ((1, (0, 1, 1)),),
            ((1, (1, 0, 1)),),
            ((1, (2, 0, 0)), (-1, (0, 2, 0))),
            ((2, (0, 0, 2)), (-1, (2, 0, 0)), (-1, (0, 2, 0))),
        ],
        3: [
            ((1, (1, 1, 1)),),
            ((1, (2, 0, 1)), (-1, (0, 2, 1))),
            ((1, (3, 0, 0)), (-3, (1, 2, 0))),
            ((3, (2, 1, 0)), (-1, (0, 3, 0))),
            ((4, (1, 0, 2)), (-1, (3, 0, 0)), (-1, (1, 2, 0))),
            ((4, (0, 1, 2)), (-1, (2, 1, 0)), (-1, (0, 3, 0))),
            ((2, (0, 0, 3)), (-3, (2, 0, 1)), (-3, (0, 2, 1))),
        ],
    },
}


def harmonic_basis_size(n: int, degree: int) -> int:
    try:
        return len(_HARMONIC_BASIS[n][degree])
    except KeyError:
        raise UnsupportedFamilyError(
            f"Гармонический базис определён для n ∈ {{2,3}}, k ∈ {{0..3}}: n={n}, k={degree}"
        )


def harmonic_polynomial(n: int, degree: int, index: int) -> Solution:
    """Однородный гармонический многочлен степени k из фиксированного базиса."""
    size = harmonic_basis_size(n, degree)
    if not 0 <= index < size:
        raise UnsupportedFamilyError(
            f"Индекс {index} вне базиса (n={n}, k={degree}, размер {size})"
        )
    terms = _HARMONIC_BASIS[n][degree][index]
    sol = polynomial(n, terms, name=f"harmonic:n={n},k={degree},i={index}")
    return _renamed(sol, degree=degree)


def harmonic_basis(n: int, degree: int) -> list[Solution]:
    return [harmonic_polynomial(n, degree, i) for i in range(harmonic_basis_size(n, degree))]


def combination(solutions: Sequence[Solution], weights: Sequence[float], name: str = "combination") -> Solution:
    """Линейная комбинация решений одной размерности."""
    if len(solutions) != len(weights) or not solutions:
        raise DimensionMismatchError("Число решений и весов должно совпадать и быть > 0")
    n = solutions[0].n
    if any(s.n != n for s in solutions):
        raise DimensionMismatchError("Комбинируемые решения разной размерности")
    coeffs = np.asarray(weights, dtype=float)
    members = tuple(solutions)

    def value(pts: np.ndarray) -> np.ndarray:
        return sum(w * s.value_fn(pts) for w, s in zip(coeffs, members))

    def gradient(pts: np.ndarray) -> np.ndarray:
        return sum(w * s.gradient_fn(pts) for w, s in zip(coeffs, members))

    degrees = {s.degree for s, w in zip(members, coeffs) if w}
    return Solution(
        n=n,
        value_fn=value,
        gradient_fn=gradient,
        degree=degrees.pop() if len(degrees) == 1 else None,
        name=name,
        singular_at_origin=any(s.singular_at_origin for s in members),
    )


def _renamed(sol: Solution, **changes) -> Solution:
    params = {
        "n": sol.n,
        "value_fn": sol.value_fn,
        "gradient_fn": sol.gradient_fn,
        "provenance": sol.provenance,
        "degree": sol.degree,
        "name": sol.name,
        "singular_at_origin": sol.singular_at_origin,
        "r_min": sol.r_min,
        "core_bulk_energy": sol.core_bulk_energy,
        "metadata": sol.metadata,
    }
    params.update(changes)
    return Solution(**params)


# ---------------------------------------------------------------------------
# Пример Пиччинини - Спаньоло
# ---------------------------------------------------------------------------


def ps_example(lam: float, Lam: float) -> tuple[CoefficientField, Solution]:
    """
    Пара (A, u) на плоскости: A = λI + (Λ-λ)x̂x̂ᵀ, u = r^α cos θ, α = √(λ/Λ).

    Реконструкция по стандартному описанию примера, не цитата.
    Плотность энергии ⟨A∇u,∇u⟩ = λ r^{2α-2} не зависит от угла,
    поэтому энергия ядра B_r равна 2πλ r^{2α}/(2α).
    """
    check_bounds(lam, Lam)
    alpha = float(np.sqrt(lam / Lam))
    field = ps2d(lam, Lam)

    def value(pts: np.ndarray) -> np.ndarray:
        radius = np.linalg.norm(pts, axis=1)
        return radius ** (alpha - 1.0) * pts[:, 0]

    def gradient(pts: np.ndarray) -> np.ndarray:
        radius = np.linalg.norm(pts, axis=1)
        common = (alpha - 1.0) * radius ** (alpha - 3.0) * pts[:, 0]
        grad = common[:, None] * pts
        grad[:, 0] += radius ** (alpha - 1.0)
        return grad

    def core_energy(r: float) -> float:
        return float(np.pi * lam * r ** (2.0 * alpha) / alpha)

    sol = Solution(
        n=2,
        value_fn=value,
        gradient_fn=gradient,
        degree=alpha,
        name=f"ps2d:lambda={lam:g},Lambda={Lam:g}",
        singular_at_origin=True,
        r_min=settings.R_MIN,
        core_bulk_energy=core_energy,
        metadata={"alpha": alpha},
    )
    return field, sol


# ---------------------------------------------------------------------------
# Невязка уравнения и разложение градиента
# ---------------------------------------------------------------------------


def flux(field: CoefficientField, sol: Solution, points: np.ndarray) -> np.ndarray:
    """A(x)∇u(x) в точках (m, n)."""
    return np.einsum("mjk,mk->mj", field.matrix(points), sol.gradient(points))


def residual(
    field: CoefficientField, sol: Solution, x: np.ndarray, h: float | np.ndarray = 1e-4
) -> np.ndarray | float:
    """
    Центральная разность div(A∇u)(x) с шагом h; для решения это O(h²).
    Шаг может быть своим для каждой точки (массив формы (m,)).
    """
    if field.n != sol.n:
        raise DimensionMismatchError(f"Поле размерности {field.n}, решение {sol.n}")
    pts, single = as_points(x, field.n)
    steps = np.broadcast_to(np.asarray(h, dtype=float), (pts.shape[0],))
    if field.singular_at_origin or sol.singular_at_origin:
        too_close = np.linalg.norm(pts, axis=1) <= 2.0 * steps
        if np.any(too_close):
            raise DomainError(
                f"Точка {pts[too_close][0].tolist()} ближе 2h к особой точке"
            )
    divergence = np.zeros(pts.shape[0])
    for i in range(field.n):
        shift = np.zeros((pts.shape[0], field.n))
        shift[:, i] = steps
        forward = flux(field, sol, pts + shift)[:, i]
        backward = flux(field, sol, pts - shift)[:, i]
        divergence += (forward - backward) / (2.0 * steps)
    return float(divergence[0]) if single else divergence


@dataclass(frozen=True)
class GradientSplit:
    """Нормальная u_N и касательные u_T компоненты ∇u в полярном репере."""

    u_N: float
    u_T: np.ndarray

    @property
    def norm_squared(self) -> float:
        return float(self.u_N**2 + self.u_T @ self.u_T)


def gradient_splits(sol: Solution, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Векторная версия: (u_N формы (m,), u_T формы (m, n-1))."""
    pts, _ = as_points(points, sol.n)
    frames = polar_frames(pts)
    polar = np.einsum("mji,mj->mi", frames, sol.gradient(pts))
    return polar[:, 0], polar[:, 1:]


def gradient_split(sol: Solution, x: np.ndarray) -> GradientSplit:
    u_N, u_T = gradient_splits(sol, np.asarray(x, dtype=float)[None, :])
    return GradientSplit(u_N=float(u_N[0]), u_T=u_T[0])

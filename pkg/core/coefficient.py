"""
Матрицы коэффициентов A(x).
Single Responsibility: эллиптичность, полярный репер P = QᵀAQ и неравенство Шура.

Все вычислители векторизованы: точки приходят массивом (m, n),
матрицы возвращаются массивом (m, n, n), производные - (m, n, n, n)
с раскладкой [..., i, j, k] = ∂_{x_i} a_{jk}.
"""

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.stats import special_ortho_group

from config.settings import settings
from core.errors import (
    CapabilityError,
    DimensionMismatchError,
    DomainError,
    OrderingError,
    SpecError,
    SymmetryError,
)
from services.logger import get_logger

MatrixEvaluator = Callable[[np.ndarray], np.ndarray]
DerivativeEvaluator = Callable[[np.ndarray], np.ndarray]


def as_points(points: np.ndarray, n: int) -> tuple[np.ndarray, bool]:
    """Привести вход к форме (m, n); второй элемент - был ли вход одной точкой."""
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[-1] != n:
        raise DimensionMismatchError(
            f"Ожидались точки размерности {n}, получено {pts.shape[-1]}"
        )
    return pts, single


def check_bounds(lam: float, Lam: float) -> None:
    """Проверить 0 < λ ≤ Λ."""
    if not (np.isfinite(lam) and np.isfinite(Lam)):
        raise OrderingError(f"Границы эллиптичности должны быть конечны: {lam}, {Lam}")
    if lam <= 0:
        raise OrderingError(f"Нижняя граница λ должна быть положительной: {lam}")
    if lam > Lam:
        raise OrderingError(f"Нарушен порядок границ: λ={lam} > Λ={Lam}")


@dataclass(frozen=True, eq=False)
class CoefficientField:
    """
    Поле коэффициентов x ↦ A(x) с объявленными границами (λ, Λ).

    Границы - доверенный вход: они проверяются выборкой (check_ellipticity),
    а не пересчитываются глобально.
    """

    n: int
    evaluator: MatrixEvaluator
    lam: float
    Lam: float
    kind: str = "constant"
    derivative: DerivativeEvaluator | None = None
    name: str = "custom"
    singular_at_origin: bool = False
    derivative_is_approximate: bool = False
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"Размерность должна быть не меньше 2: {self.n}")
        if self.kind not in ("constant", "variable"):
            raise SpecError(f"Неизвестный тип поля: {self.kind}")
        check_bounds(self.lam, self.Lam)

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    @property
    def has_derivatives(self) -> bool:
        return self.is_constant or self.derivative is not None

    def matrix(self, points: np.ndarray) -> np.ndarray:
        """A(x) в точках; одна точка (n,) даёт матрицу (n, n)."""
        pts, single = as_points(points, self.n)
        if self.singular_at_origin:
            radii = np.linalg.norm(pts, axis=1)
            if np.any(radii == 0.0):
                raise DomainError(f"Поле {self.name} не определено в начале координат")
        values = self.evaluator(pts)
        return values[0] if single else values

    def derivatives(self, points: np.ndarray) -> np.ndarray:
        """Тензор ∂_{x_i} a_{jk}; для постоянного поля - нули без вычислений."""
        pts, single = as_points(points, self.n)
        if self.is_constant:
            values = np.zeros((pts.shape[0], self.n, self.n, self.n))
        elif self.derivative is None:
            raise CapabilityError(
                f"У переменного поля {self.name} нет вычислителя производных ∂A"
            )
        else:
            values = self.derivative(pts)
        return values[0] if single else values

    def with_finite_difference_derivatives(
        self, h: float = settings.FD_DERIVATIVE_STEP
    ) -> "CoefficientField":
        """
        Подключить центральные разности шага h как вычислитель ∂A.
        Точность падает до O(h²) плюс ошибка округления ~ eps/h.
        """
        get_logger().warning(
            f"Поле {self.name}: производные ∂A берутся разностями (h={h:g}), "
            f"точность err снижена"
        )

        def fd_derivative(pts: np.ndarray) -> np.ndarray:
            out = np.empty((pts.shape[0], self.n, self.n, self.n))
            for i in range(self.n):
                step = np.zeros(self.n)
                step[i] = h
                out[:, i] = (self.evaluator(pts + step) - self.evaluator(pts - step)) / (
                    2.0 * h
                )
            return out

        return CoefficientField(
            n=self.n,
            evaluator=self.evaluator,
            lam=self.lam,
            Lam=self.Lam,
            kind=self.kind,
            derivative=fd_derivative,
            name=self.name,
            singular_at_origin=self.singular_at_origin,
            derivative_is_approximate=True,
            descriptor={**self.descriptor, "derivatives": "finite-difference"},
        )

    def to_descriptor(self) -> dict:
        return dict(self.descriptor) or {"kind": "custom", "name": self.name}


# ---------------------------------------------------------------------------
# Конструкторы полей
# ---------------------------------------------------------------------------


def constant(
    matrix, lam: float | None = None, Lam: float | None = None, name: str = "const"
) -> CoefficientField:
    """Постоянное поле; границы по умолчанию - крайние собственные значения."""
    mat = np.array(matrix, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise SpecError(f"Матрица должна быть квадратной, получено {mat.shape}")
    if not np.allclose(mat, mat.T, atol=settings.MATRIX_TOL, rtol=0.0):
        raise SymmetryError(f"Матрица несимметрична: {mat.tolist()}")
    eigenvalues = np.linalg.eigvalsh(mat)
    lam = float(eigenvalues[0]) if lam is None else float(lam)
    Lam = float(eigenvalues[-1]) if Lam is None else float(Lam)
    frozen = mat.copy()
    frozen.setflags(write=False)

    def evaluate(pts: np.ndarray) -> np.ndarray:
        return np.broadcast_to(frozen, (pts.shape[0],) + frozen.shape).copy()

    return CoefficientField(
        n=mat.shape[0],
        evaluator=evaluate,
        lam=lam,
        Lam=Lam,
        kind="constant",
        name=name,
        descriptor={"kind": "constant", "matrix": mat.tolist(), "lambda": lam, "Lambda": Lam},
    )


def identity(n: int) -> CoefficientField:
    result = constant(np.eye(n), 1.0, 1.0, name="identity")
    return _with_descriptor(result, {"kind": "builtin", "name": "identity", "n": n})


def random_constant(
    n: int, lam: float, Lam: float, rng: np.random.Generator
) -> CoefficientField:
    """Случайная SPD матрица Q diag(μ) Qᵀ, спектр в [λ, Λ] с достижением обоих концов."""
    check_bounds(lam, Lam)
    spectrum = np.sort(rng.uniform(lam, Lam, size=n))
    spectrum[0], spectrum[-1] = lam, Lam
    frame = special_ortho_group.rvs(n, random_state=rng) if n > 1 else np.eye(1)
    mat = frame @ np.diag(spectrum) @ frame.T
    mat = 0.5 * (mat + mat.T)
    return constant(mat, lam, Lam, name="const:random")


def ps2d(lam: float, Lam: float) -> CoefficientField:
    """
    Радиально-анизотропное поле на плоскости: собственное значение Λ вдоль x/|x|
    и λ в касательном направлении, A = λI + (Λ-λ) x̂x̂ᵀ.
    """
    check_bounds(lam, Lam)
    gap = Lam - lam

    def evaluate(pts: np.ndarray) -> np.ndarray:
        unit = pts / np.linalg.norm(pts, axis=1, keepdims=True)
        return lam * np.eye(2) + gap * np.einsum("mj,mk->mjk", unit, unit)

    def derivative(pts: np.ndarray) -> np.ndarray:
        radius = np.linalg.norm(pts, axis=1)
        unit = pts / radius[:, None]
        eye = np.eye(2)
        # ∂_i(x̂_j x̂_k) = (δ_ij x̂_k + δ_ik x̂_j - 2 x̂_i x̂_j x̂_k) / |x|
        term = (
            np.einsum("ij,mk->mijk", eye, unit)
            + np.einsum("ik,mj->mijk", eye, unit)
            - 2.0 * np.einsum("mi,mj,mk->mijk", unit, unit, unit)
        )
        return gap * term / radius[:, None, None, None]

    return CoefficientField(
        n=2,
        evaluator=evaluate,
        lam=float(lam),
        Lam=float(Lam),
        kind="variable",
        derivative=derivative,
        name="ps2d",
        singular_at_origin=True,
        descriptor={"kind": "builtin", "name": "ps2d", "lambda": lam, "Lambda": Lam},
    )


def radial(n: int, eps: float) -> CoefficientField:
    """A(x) = (1 + ε|x|²) I на единичном шаре, границы (1, 1+ε)."""
    if eps < 0:
        raise DomainError(f"Параметр ε должен быть неотрицательным: {eps}")
    eye = np.eye(n)

    def evaluate(pts: np.ndarray) -> np.ndarray:
        scale = 1.0 + eps * np.sum(pts**2, axis=1)
        return scale[:, None, None] * eye

    def derivative(pts: np.ndarray) -> np.ndarray:
        return 2.0 * eps * np.einsum("mi,jk->mijk", pts, eye)

    return CoefficientField(
        n=n,
        evaluator=evaluate,
        lam=1.0,
        Lam=1.0 + eps,
        kind="variable",
        derivative=derivative,
        name="radial",
        descriptor={"kind": "builtin", "name": "radial", "n": n, "eps": eps},
    )


def layered(n: int, eps: float) -> CoefficientField:
    """A(x) = (1 + ε x_n²) I; u = x₁ - точное решение, err ≠ 0."""
    if eps < 0:
        raise DomainError(f"Параметр ε должен быть неотрицательным: {eps}")
    eye = np.eye(n)

    def evaluate(pts: np.ndarray) -> np.ndarray:
        scale = 1.0 + eps * pts[:, -1] ** 2
        return scale[:, None, None] * eye

    def derivative(pts: np.ndarray) -> np.ndarray:
        out = np.zeros((pts.shape[0], n, n, n))
        out[:, n - 1] = 2.0 * eps * pts[:, -1, None, None] * eye
        return out

    return CoefficientField(
        n=n,
        evaluator=evaluate,
        lam=1.0,
        Lam=1.0 + eps,
        kind="variable",
        derivative=derivative,
        name="layered",
        descriptor={"kind": "builtin", "name": "layered", "n": n, "eps": eps},
    )


def _with_descriptor(source: CoefficientField, descriptor: dict) -> CoefficientField:
    return replace(source, descriptor=descriptor)


BUILTIN_FIELDS = ("identity", "ps2d", "radial", "layered")


def from_descriptor(descriptor: dict) -> CoefficientField:
    """
    Собрать поле из JSON дескриптора:
    {"kind":"constant","matrix":[[...]]} или {"kind":"builtin","name":"ps2d",...}.
    """
    kind = descriptor.get("kind")
    try:
        if kind == "constant":
            return constant(
                descriptor["matrix"], descriptor.get("lambda"), descriptor.get("Lambda")
            )
        if kind == "builtin":
            name = descriptor.get("name")
            if name == "identity":
                return identity(int(descriptor.get("n", 2)))
            if name == "ps2d":
                return ps2d(float(descriptor["lambda"]), float(descriptor["Lambda"]))
            if name == "radial":
                return radial(int(descriptor.get("n", 2)), float(descriptor["eps"]))
            if name == "layered":
                return layered(int(descriptor.get("n", 2)), float(descriptor["eps"]))
            raise SpecError(
                f"Неизвестное встроенное поле: {name}. "
                f"Поддерживаются: {', '.join(BUILTIN_FIELDS)}"
            )
    except KeyError as e:
        raise SpecError(f"В дескрипторе поля не хватает ключа {e}")
    raise SpecError(f"Неизвестный вид дескриптора поля: {kind}")


# ---------------------------------------------------------------------------
# Эллиптичность
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EllipticityVerdict:
    """Худшие отношения Рэлея по выборке точек и направлений."""

    min_quotient: float
    max_quotient: float
    lam: float
    Lam: float
    tolerance: float
    samples: int

    @property
    def passed(self) -> bool:
        return (
            self.min_quotient >= self.lam - self.tolerance
            and self.max_quotient <= self.Lam + self.tolerance
        )

    def to_dict(self) -> dict:
        return {
            "min_quotient": self.min_quotient,
            "max_quotient": self.max_quotient,
            "lambda": self.lam,
            "Lambda": self.Lam,
            "tolerance": self.tolerance,
            "samples": self.samples,
            "passed": self.passed,
        }


def check_ellipticity(
    field: CoefficientField,
    samples: np.ndarray,
    trials: int = 16,
    rng: np.random.Generator | None = None,
    tol: float = settings.MATRIX_TOL,
) -> EllipticityVerdict:
    """
    Проверить λ|ξ|² ≤ ⟨A(x)ξ,ξ⟩ ≤ Λ|ξ|² на выборке точек из замкнутого шара.

    В минимум и максимум входят случайные единичные ξ и собственные векторы
    (крайние собственные значения - точные экстремумы отношения Рэлея).
    """
    pts, _ = as_points(samples, field.n)
    if np.any(np.linalg.norm(pts, axis=1) > 1.0 + 1e-12):
        raise DomainError("Точки проверки эллиптичности должны лежать в единичном шаре")
    rng = rng or np.random.default_rng(settings.DEFAULT_SEED)

    mats = field.matrix(pts)
    scale = np.maximum(1.0, np.abs(mats).max(axis=(1, 2)))
    asymmetry = np.abs(mats - np.swapaxes(mats, 1, 2)).max(axis=(1, 2))
    if np.any(asymmetry > tol * scale):
        worst = int(np.argmax(asymmetry / scale))
        raise SymmetryError(
            f"A(x) несимметрична в точке {pts[worst].tolist()}: "
            f"max|A-Aᵀ| = {asymmetry[worst]:.3e}"
        )

    directions = rng.standard_normal((pts.shape[0], trials, field.n))
    directions /= np.linalg.norm(directions, axis=2, keepdims=True)
    quotients = np.einsum("mtj,mjk,mtk->mt", directions, mats, directions)
    eigenvalues = np.linalg.eigvalsh(mats)

    return EllipticityVerdict(
        min_quotient=float(min(quotients.min(), eigenvalues[:, 0].min())),
        max_quotient=float(max(quotients.max(), eigenvalues[:, -1].max())),
        lam=field.lam,
        Lam=field.Lam,
        tolerance=tol,
        samples=int(pts.shape[0]),
    )


# ---------------------------------------------------------------------------
# Полярный репер
# ---------------------------------------------------------------------------


def polar_frames(points: np.ndarray) -> np.ndarray:
    """
    Ортогональные матрицы Q(x) с первым столбцом x/|x|, массивом (m, n, n).

    n = 2: поворот J(θ). n ≥ 3: отражение Хаусхолдера, переводящее e₁ в x/|x|
    (шов при x/|x| = e₁, там Q = I).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    m, n = pts.shape
    radius = np.linalg.norm(pts, axis=1)
    if np.any(radius == 0.0):
        raise DomainError("Полярный репер не определён в начале координат")
    unit = pts / radius[:, None]

    if n == 2:
        cos, sin = unit[:, 0], unit[:, 1]
        frames = np.empty((m, 2, 2))
        frames[:, 0, 0], frames[:, 0, 1] = cos, -sin
        frames[:, 1, 0], frames[:, 1, 1] = sin, cos
        return frames

    # v = x̂ - e₁; первая компонента без катастрофического сокращения
    tail_sq = np.sum(unit[:, 1:] ** 2, axis=1)
    v = unit.copy()
    positive = unit[:, 0] > 0
    v[positive, 0] = -tail_sq[positive] / (1.0 + unit[positive, 0])
    v[~positive, 0] = unit[~positive, 0] - 1.0
    norm_sq = np.sum(v**2, axis=1)

    frames = np.broadcast_to(np.eye(n), (m, n, n)).copy()
    active = norm_sq > 0.0
    frames[active] -= 2.0 * np.einsum("mi,mj->mij", v[active], v[active]) / norm_sq[
        active, None, None
    ]
    return frames


def polar_frame(x: np.ndarray) -> np.ndarray:
    """Q(x) для одной ненулевой точки."""
    return polar_frames(np.asarray(x, dtype=float)[None, :])[0]


@dataclass(frozen=True)
class PolarBlocks:
    """Блоки P = QᵀA(x)Q: скаляр p11, вектор P12, матрица P22 и сам репер Q."""

    p11: float
    P12: np.ndarray
    P22: np.ndarray
    Q: np.ndarray

    @property
    def dimension(self) -> int:
        return self.Q.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        n = self.dimension
        full = np.empty((n, n))
        full[0, 0] = self.p11
        full[0, 1:] = self.P12
        full[1:, 0] = self.P12
        full[1:, 1:] = self.P22
        return full

    @classmethod
    def from_matrix(cls, P: np.ndarray, Q: np.ndarray) -> "PolarBlocks":
        return cls(
            p11=float(P[0, 0]),
            P12=np.array(P[0, 1:]),
            P22=np.array(P[1:, 1:]),
            Q=np.array(Q),
        )


def polar_conjugate(field: CoefficientField, x: np.ndarray) -> PolarBlocks:
    """Блоки QᵀA(x)Q; спектр совпадает со спектром A(x)."""
    point = np.asarray(x, dtype=float)
    Q = polar_frame(point)
    P = Q.T @ field.matrix(point) @ Q
    return PolarBlocks.from_matrix(0.5 * (P + P.T), Q)


# ---------------------------------------------------------------------------
# Неравенство Шура
# ---------------------------------------------------------------------------


def _check_tangent(blocks: PolarBlocks, xi: np.ndarray) -> np.ndarray:
    vec = np.asarray(xi, dtype=float).ravel()
    if vec.shape[0] != blocks.dimension - 1:
        raise DimensionMismatchError(
            f"Касательный вектор должен иметь длину {blocks.dimension - 1}, "
            f"получено {vec.shape[0]}"
        )
    if not np.any(vec):
        raise DomainError("Касательный вектор ξ должен быть ненулевым")
    return vec


def schur_gap(blocks: PolarBlocks, lam: float, xi: np.ndarray) -> float:
    """p11⟨P22ξ,ξ⟩ - ⟨P12,ξ⟩² - λ·p11·|ξ|²; неотрицателен для эллиптичного поля."""
    vec = _check_tangent(blocks, xi)
    return float(
        blocks.p11 * vec @ blocks.P22 @ vec
        - (blocks.P12 @ vec) ** 2
        - lam * blocks.p11 * (vec @ vec)
    )


def schur_complement_minimum(blocks: PolarBlocks, xi: np.ndarray) -> float:
    """min по t квадратичной формы ⟨P v, v⟩ при v = (t, ξ)."""
    vec = _check_tangent(blocks, xi)
    return float(vec @ blocks.P22 @ vec - (blocks.P12 @ vec) ** 2 / blocks.p11)

"""
Квадратурные правила на шарах B_r и сферах S_r.
Single Responsibility: только узлы и веса, без знания о подынтегральных функциях.

Радиальная часть - Гаусс-Лежандр с весом ρ^{n-1}; при r_min > 0 используется
логарифмическая замена ρ = r_min^{1-t} r^t, степенные подынтегральные функции
вида ρ^β после неё интегрируются спектрально.
Угловая часть рекурсивна: S¹ - трапеции, S^{n-1} - Гаусс-Якоби по t = cos θ
с весом (1-t²)^{(n-3)/2}, умноженный на правило на S^{n-2}.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma, roots_jacobi

from config.settings import settings
from core.errors import DomainError


def ball_volume(n: int, r: float = 1.0) -> float:
    """|B_r| в R^n."""
    return float(np.pi ** (n / 2) / gamma(n / 2 + 1) * r**n)


def sphere_area(n: int, r: float = 1.0) -> float:
    """|S_r| в R^n."""
    return float(2.0 * np.pi ** (n / 2) / gamma(n / 2) * r ** (n - 1))


def _circle_rule(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    angles = 2.0 * np.pi * np.arange(nodes) / nodes
    points = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    weights = np.full(nodes, 2.0 * np.pi / nodes)
    return points, weights


def sphere_rule(n: int, polar_nodes: int, azimuth_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Узлы (q, n) и веса (q,) на единичной сфере S^{n-1}.
    Последняя координата - косинус полярного угла уровня n.
    """
    if n < 2:
        raise DomainError(f"Размерность должна быть не меньше 2: {n}")
    if n == 2:
        return _circle_rule(azimuth_nodes)

    lower_points, lower_weights = sphere_rule(n - 1, polar_nodes, azimuth_nodes)
    exponent = (n - 3) / 2.0
    t, wt = roots_jacobi(polar_nodes, exponent, exponent)
    scale = np.sqrt(1.0 - t**2)

    points = np.concatenate(
        [
            np.repeat(scale[:, None], lower_points.shape[0], axis=0)
            * np.tile(lower_points, (polar_nodes, 1)),
            np.repeat(t, lower_points.shape[0])[:, None],
        ],
        axis=1,
    )
    weights = np.repeat(wt, lower_weights.shape[0]) * np.tile(lower_weights, polar_nodes)
    return points, weights


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """
    Тензорное правило: радиальные узлы × угловые узлы.

    r_min > 0 означает интегрирование по кольцу [r_min, r]; ядро B_{r_min}
    в правило не входит.
    """

    n: int
    radial_nodes: int
    polar_nodes: int
    azimuth_nodes: int
    r_min: float = 0.0
    _radial: tuple[np.ndarray, np.ndarray] = field(init=False, repr=False)
    _angular: tuple[np.ndarray, np.ndarray] = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"Размерность должна быть не меньше 2: {self.n}")
        if self.r_min < 0 or self.r_min >= 1:
            raise DomainError(f"Радиус усечения должен лежать в [0, 1): {self.r_min}")
        if min(self.radial_nodes, self.polar_nodes, self.azimuth_nodes) < 1:
            raise DomainError("Число узлов квадратуры должно быть положительным")
        t, w = roots_jacobi(self.radial_nodes, 0.0, 0.0)
        object.__setattr__(self, "_radial", (t, w))
        object.__setattr__(
            self, "_angular", sphere_rule(self.n, self.polar_nodes, self.azimuth_nodes)
        )

    @classmethod
    def default(cls, n: int, r_min: float = 0.0) -> "QuadratureRule":
        """Порядки по умолчанию из настроек для размерности n."""
        if n == 2:
            polar, azimuth = 1, settings.ANGULAR_NODES_2D
        elif n == 3:
            polar, azimuth = settings.POLAR_NODES_3D, settings.AZIMUTH_NODES_3D
        else:
            polar, azimuth = settings.POLAR_NODES_HIGH_DIM, settings.AZIMUTH_NODES_HIGH_DIM
        return cls(
            n=n,
            radial_nodes=settings.RADIAL_NODES,
            polar_nodes=polar,
            azimuth_nodes=azimuth,
            r_min=r_min,
        )

    @classmethod
    def compact(cls, n: int, degree: int) -> "QuadratureRule":
        """Наименьшее правило, точное для многочленов степени degree в B_1."""
        return cls(
            n=n,
            radial_nodes=(degree + n) // 2 + 1,
            polar_nodes=degree // 2 + 1,
            azimuth_nodes=degree + 2,
        )

    def truncated(self, r_min: float) -> "QuadratureRule":
        return QuadratureRule(
            n=self.n,
            radial_nodes=self.radial_nodes,
            polar_nodes=self.polar_nodes,
            azimuth_nodes=self.azimuth_nodes,
            r_min=r_min,
        )

    @property
    def angular_size(self) -> int:
        return self._angular[1].shape[0]

    @property
    def total_nodes(self) -> int:
        return self.radial_nodes * self.angular_size

    @property
    def unit_sphere(self) -> tuple[np.ndarray, np.ndarray]:
        points, weights = self._angular
        return points.copy(), weights.copy()

    def _check_radius(self, r: float) -> None:
        if not 0 < r <= 1.0 + 1e-12:
            raise DomainError(f"Радиус должен лежать в (0, 1]: {r}")

    def sphere(self, r: float) -> tuple[np.ndarray, np.ndarray]:
        """Узлы и веса на S_r (вес включает r^{n-1})."""
        if r <= 0:
            raise DomainError(f"Радиус сферы должен быть положительным: {r}")
        points, weights = self._angular
        return r * points, weights * r ** (self.n - 1)

    def radial(self, r: float) -> tuple[np.ndarray, np.ndarray]:
        """Радиальные узлы на [r_min, r] с весом ρ^{n-1} dρ."""
        self._check_radius(r)
        t, w = self._radial
        s = 0.5 * (t + 1.0)
        if self.r_min > 0:
            if r <= self.r_min:
                raise DomainError(f"Радиус {r} не превосходит радиус усечения {self.r_min}")
            log_ratio = np.log(r / self.r_min)
            rho = self.r_min * np.exp(s * log_ratio)
            jacobian = 0.5 * w * rho * log_ratio
        else:
            rho = r * s
            jacobian = 0.5 * w * r
        return rho, jacobian * rho ** (self.n - 1)

    def ball(self, r: float) -> tuple[np.ndarray, np.ndarray]:
        """Узлы (m, n) и веса (m,) на B_r (или на кольце r_min < |x| < r)."""
        rho, radial_weights = self.radial(r)
        points, weights = self._angular
        nodes = (rho[:, None, None] * points[None, :, :]).reshape(-1, self.n)
        return nodes, np.outer(radial_weights, weights).ravel()

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "radial_nodes": self.radial_nodes,
            "polar_nodes": self.polar_nodes,
            "azimuth_nodes": self.azimuth_nodes,
            "angular_nodes": self.angular_size,
            "total_nodes": self.total_nodes,
            "r_min": self.r_min,
        }

"""
Энергетический движок.
Single Responsibility: интегралы энергии и тождества Похожаева по квадратурным правилам.

Обозначения: g(r) = ∫_{B_r}⟨A∇u,∇u⟩dx - объёмная энергия,
s(r) = ∫_{S_r}⟨A∇u,∇u⟩dσ - поверхностная.
"""

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from config.settings import settings
from core.coefficient import CoefficientField
from core.errors import (
    DimensionMismatchError,
    DomainError,
    InsufficientLadderError,
    LabError,
    SpecError,
)
from core.quadrature import QuadratureRule
from core.solutions import Solution, flux, gradient_splits, residual
from services.logger import get_logger


def _check_dimensions(rule: QuadratureRule, *objects) -> None:
    for obj in objects:
        if obj.n != rule.n:
            raise DimensionMismatchError(
                f"Размерность правила {rule.n} не совпадает с размерностью {obj.n} "
                f"({getattr(obj, 'name', type(obj).__name__)})"
            )


def energy_density(field: CoefficientField, sol: Solution, points: np.ndarray) -> np.ndarray:
    """⟨A∇u,∇u⟩ в точках."""
    grad = sol.gradient(points)
    return np.einsum("mj,mjk,mk->m", grad, field.matrix(points), grad)


def _core_correction(sol: Solution, rule: QuadratureRule) -> float:
    if rule.r_min <= 0 or sol.core_bulk_energy is None:
        return 0.0
    correction = sol.core_bulk_energy(rule.r_min)
    get_logger().debug(
        f"Усечение r_min={rule.r_min:g} для {sol.name}: поправка ядра {correction:.3e}"
    )
    return float(correction)


def bulk_energy(
    field: CoefficientField, sol: Solution, r: float, rule: QuadratureRule
) -> float:
    """
    g(r) по правилу; на усечённом правиле добавляется точная энергия ядра,
    если решение её знает.
    """
    _check_dimensions(rule, field, sol)
    points, weights = rule.ball(r)
    return float(weights @ energy_density(field, sol, points)) + _core_correction(sol, rule)


def surface_energy(
    field: CoefficientField, sol: Solution, r: float, rule: QuadratureRule
) -> float:
    """s(r) = ∫_{S_r}⟨A∇u,∇u⟩dσ."""
    _check_dimensions(rule, field, sol)
    if not 0 < r <= 1.0 + 1e-12:
        raise DomainError(f"Радиус должен лежать в (0, 1]: {r}")
    points, weights = rule.sphere(r)
    return float(weights @ energy_density(field, sol, points))


def sphere_mean(sol: Solution, r: float, rule: QuadratureRule) -> float:
    """Среднее k = ⨍_{S_r} u dσ."""
    _check_dimensions(rule, sol)
    points, weights = rule.sphere(r)
    return float(weights @ sol.value(points) / weights.sum())


def tangential_normal_integrals(
    sol: Solution, r: float, rule: QuadratureRule
) -> tuple[float, float]:
    """(∫_{S_r}|u_T|²dσ, ∫_{S_r}|u_N|²dσ)."""
    _check_dimensions(rule, sol)
    points, weights = rule.sphere(r)
    u_N, u_T = gradient_splits(sol, points)
    return float(weights @ np.sum(u_T**2, axis=1)), float(weights @ u_N**2)


# ---------------------------------------------------------------------------
# Профиль энергии по лестнице радиусов
# ---------------------------------------------------------------------------


def radius_ladder(
    start: float = settings.LADDER_START,
    stop: float = settings.LADDER_STOP,
    count: int = settings.LADDER_COUNT,
) -> np.ndarray:
    """Геометрическая лестница радиусов."""
    if not 0 < start < stop <= 1.0:
        raise DomainError(f"Лестница должна удовлетворять 0 < start < stop ≤ 1: {start}, {stop}")
    if count < 2:
        raise InsufficientLadderError(f"В лестнице нужно хотя бы 2 радиуса: {count}")
    return np.geomspace(start, stop, count)


def parse_ladder(spec: str) -> np.ndarray:
    """
    Разобрать лестницу "0.1..1.0x12" (геометрическая), "lin:0.5..1.0x26"
    (равномерная) или явный список "0.2,0.5,1".
    """
    text = spec.strip()
    try:
        if ".." in text:
            linear = text.startswith("lin:")
            body = text[4:] if linear else text
            bounds, _, count = body.partition("x")
            start, stop = (float(v) for v in bounds.split(".."))
            if linear:
                if not 0 < start < stop <= 1.0:
                    raise DomainError(f"Лестница вне (0, 1]: {spec}")
                return np.linspace(start, stop, int(count))
            return radius_ladder(start, stop, int(count))
        radii = np.array(sorted(float(v) for v in text.split(",")))
    except ValueError as e:
        if isinstance(e, LabError):
            raise
        raise SpecError(f"Некорректная лестница радиусов '{spec}': {e}")
    if radii.size == 0 or radii[0] <= 0 or radii[-1] > 1.0 or np.any(np.diff(radii) <= 0):
        raise SpecError(f"Радиусы лестницы должны быть различны и лежать в (0, 1]: {spec}")
    return radii


@dataclass(frozen=True)
class EnergyProfile:
    """Значения g(r_i), s(r_i) на лестнице и s в серединах соседних радиусов."""

    n: int
    radii: np.ndarray
    bulk: np.ndarray
    surface: np.ndarray
    midpoint_surface: np.ndarray
    truncation: float = 0.0
    label: str = ""

    @property
    def ratios(self) -> np.ndarray:
        """ρ(r) = r·s(r)/g(r)."""
        return self.radii * self.surface / self.bulk

    def fundamental_theorem_gaps(self) -> np.ndarray:
        """Относительное расхождение разностной производной g и s в середине отрезка."""
        slopes = np.diff(self.bulk) / np.diff(self.radii)
        return np.abs(slopes - self.midpoint_surface) / np.abs(self.midpoint_surface)

    def at_radius(self, r: float) -> tuple[float, float]:
        """(g, s) в узле лестницы, совпадающем с r."""
        hits = np.flatnonzero(np.isclose(self.radii, r, rtol=0.0, atol=1e-12))
        if hits.size == 0:
            raise DomainError(f"Радиуса {r} нет в лестнице профиля")
        return float(self.bulk[hits[0]]), float(self.surface[hits[0]])

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "label": self.label,
            "radii": self.radii.tolist(),
            "bulk": self.bulk.tolist(),
            "surface": self.surface.tolist(),
            "ratios": self.ratios.tolist(),
            "truncation": self.truncation,
        }


def energy_profile(
    field: CoefficientField,
    sol: Solution,
    ladder: Sequence[float],
    rule: QuadratureRule,
) -> EnergyProfile:
    radii = np.asarray(ladder, dtype=float)
    if radii.ndim != 1 or radii.size < 2 or np.any(np.diff(radii) <= 0):
        raise InsufficientLadderError("Лестница должна содержать ≥ 2 возрастающих радиуса")
    _check_dimensions(rule, field, sol)

    bulk = np.array([bulk_energy(field, sol, r, rule) for r in radii])
    surface = np.array([surface_energy(field, sol, r, rule) for r in radii])
    midpoints = 0.5 * (radii[1:] + radii[:-1])
    midpoint_surface = np.array([surface_energy(field, sol, r, rule) for r in midpoints])
    return EnergyProfile(
        n=rule.n,
        radii=radii,
        bulk=bulk,
        surface=surface,
        midpoint_surface=midpoint_surface,
        truncation=_core_correction(sol, rule),
        label=sol.name,
    )


# ---------------------------------------------------------------------------
# Тождество Похожаева
# ---------------------------------------------------------------------------


def err_density(field: CoefficientField, sol: Solution, points: np.ndarray) -> np.ndarray:
    """
    Подынтегральное выражение err с тензором dA[i, j, k] = ∂_i a_jk:
    Σ x_j ∂_i a_ij ⟨A∇u,∇u⟩ - 2 Σ (A∇u)_j ∂_j a_kl u_k x_l + Σ (Ax)_i ⟨∂_i A ∇u,∇u⟩.
    """
    mats = field.matrix(points)
    dA = field.derivatives(points)
    grad = sol.gradient(points)
    flow = np.einsum("mjk,mk->mj", mats, grad)
    energy = np.einsum("mj,mj->m", flow, grad)
    stretched = np.einsum("mij,mj->mi", mats, points)

    divergence_term = np.einsum("mj,miij->m", points, dA) * energy
    cross_term = np.einsum("mj,mjkl,mk,ml->m", flow, dA, grad, points)
    transport_term = np.einsum("mi,mikl,mk,ml->m", stretched, dA, grad, grad)
    return divergence_term - 2.0 * cross_term + transport_term


def err_term(field: CoefficientField, sol: Solution, rule: QuadratureRule) -> float:
    """err по B_1 (по кольцу при r_min > 0); для постоянного поля ровно 0."""
    _check_dimensions(rule, field, sol)
    if field.is_constant:
        return 0.0
    points, weights = rule.ball(1.0)
    return float(weights @ err_density(field, sol, points))


@dataclass(frozen=True)
class PohozaevReport:
    """
    Слагаемые обобщённого тождества Похожаева на B_1:
    lhs = t_flux + t_trace - t_sq + err - t_inner (+ source для не-решений).
    """

    lhs: float
    t_flux: float
    t_trace: float
    t_sq: float
    err: float
    t_inner: float
    source: float | None
    n: int
    rule: dict = field(default_factory=dict)
    label: str = ""

    @property
    def rhs(self) -> float:
        return self.t_flux + self.t_trace - self.t_sq + self.err - self.t_inner

    @property
    def residual(self) -> float:
        return self.lhs - self.rhs

    @property
    def relative_residual(self) -> float:
        scale = abs(self.lhs)
        return abs(self.residual) / scale if scale > 0 else abs(self.residual)

    @property
    def err_sign(self) -> int:
        return int(np.sign(self.err))

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "n": self.n,
            "lhs": self.lhs,
            "t_flux": self.t_flux,
            "t_trace": self.t_trace,
            "t_sq": self.t_sq,
            "err": self.err,
            "err_sign": self.err_sign,
            "t_inner": self.t_inner,
            "source": self.source,
            "rhs": self.rhs,
            "residual": self.residual,
            "relative_residual": self.relative_residual,
            "rule": dict(self.rule),
        }


def _source_term(
    field: CoefficientField, sol: Solution, points: np.ndarray, weights: np.ndarray
) -> float:
    radius = np.linalg.norm(points, axis=1)
    steps = 1e-4 * np.maximum(radius, 1e-2)
    if field.singular_at_origin or sol.singular_at_origin:
        steps = np.minimum(steps, 0.25 * radius)
    divergence = residual(field, sol, points, h=steps)
    pushed = np.einsum("mj,mj->m", points, flux(field, sol, points))
    return float(-2.0 * weights @ (divergence * pushed))


def pohozaev_report(
    field: CoefficientField, sol: Solution, rule: QuadratureRule
) -> PohozaevReport:
    """
    Все слагаемые тождества по правилу rule.
    Для решений сетки source не вычисляется: их градиенты лишь кусочно-гладкие.
    """
    _check_dimensions(rule, field, sol)
    logger = get_logger()

    # Граница S_1: нормаль совпадает с x
    points, weights = rule.sphere(1.0)
    flow = flux(field, sol, points)
    energy = np.einsum("mj,mj->m", flow, sol.gradient(points))
    stretch = np.einsum("mj,mjk,mk->m", points, field.matrix(points), points)
    lhs = float(weights @ (energy * stretch))
    t_flux = float(2.0 * weights @ np.einsum("mj,mj->m", flow, points) ** 2)

    bulk_points, bulk_weights = rule.ball(1.0)
    mats = field.matrix(bulk_points)
    bulk_flow = np.einsum("mjk,mk->mj", mats, sol.gradient(bulk_points))
    bulk_energy_density = np.einsum("mj,mj->m", bulk_flow, sol.gradient(bulk_points))
    t_trace = float(bulk_weights @ (np.trace(mats, axis1=1, axis2=2) * bulk_energy_density))
    t_sq = float(2.0 * bulk_weights @ np.sum(bulk_flow**2, axis=1))
    err = err_term(field, sol, rule)

    t_inner = 0.0
    if rule.r_min > 0:
        # Поток поля Похожаева через внутреннюю сферу, нормаль x/|x|
        inner_points, inner_weights = rule.sphere(rule.r_min)
        unit = inner_points / rule.r_min
        inner_flow = flux(field, sol, inner_points)
        inner_energy = np.einsum("mj,mj->m", inner_flow, sol.gradient(inner_points))
        normal_flux = np.einsum("mj,mj->m", inner_flow, unit)
        pushed = np.einsum("mj,mj->m", inner_points, inner_flow)
        stretched = np.einsum("mj,mjk,mk->m", inner_points, field.matrix(inner_points), unit)
        t_inner = float(inner_weights @ (2.0 * normal_flux * pushed - stretched * inner_energy))

    source = _source_term(field, sol, bulk_points, bulk_weights) if sol.is_analytic else None

    report = PohozaevReport(
        lhs=lhs,
        t_flux=t_flux,
        t_trace=t_trace,
        t_sq=t_sq,
        err=err,
        t_inner=t_inner,
        source=source,
        n=rule.n,
        rule=rule.to_dict(),
        label=sol.name,
    )
    logger.debug(
        f"Похожаев для {sol.name}: lhs={lhs:.6e}, err={err:.3e}, "
        f"относительная невязка {report.relative_residual:.3e}"
    )
    return report

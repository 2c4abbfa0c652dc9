"""
Слой проверок: неравенства монотонности, показатели убывания и осцилляции,
оценка с учётом err, гармонические тождества и неравенство Пуанкаре.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import linregress, qmc

from config.settings import settings
from core.coefficient import CoefficientField, identity
from core.energy import (
    EnergyProfile,
    PohozaevReport,
    bulk_energy,
    sphere_mean,
    surface_energy,
    tangential_normal_integrals,
)
from core.errors import (
    DegenerateSolutionError,
    DimensionMismatchError,
    DomainError,
    InsufficientLadderError,
)
from core.exponent import (
    err_correction_coefficient,
    naive_chain_constant,
    surface_to_bulk_constant,
)
from core.quadrature import QuadratureRule
from core.solutions import Solution, affine, flux, residual
from services.logger import get_logger

MIN_FIT_POINTS = 5

_FIT_FIELDS = (
    "beta",
    "beta_stderr",
    "alpha_implied",
    "decay_residual",
    "alpha_osc",
    "osc_stderr",
    "osc_residual",
)


# ---------------------------------------------------------------------------
# Монотонность
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonotonicityVerdict:
    """
    Отношения ρ(r) по лестнице и запас min_r(ρ - константа).
    Допуск относителен: tolerance_used = tolerance · constant.
    """

    kind: str
    radii: np.ndarray
    ratios: np.ndarray
    constant: float
    tolerance: float
    label: str = ""

    @property
    def margin(self) -> float:
        return float(np.min(self.ratios - self.constant))

    @property
    def tolerance_used(self) -> float:
        return self.tolerance * self.constant

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tolerance_used

    @property
    def equality(self) -> bool:
        """ρ(r) совпадает с константой на всей лестнице."""
        return bool(np.max(np.abs(self.ratios - self.constant)) <= self.tolerance_used)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "label": self.label,
            "radii": self.radii.tolist(),
            "ratios": self.ratios.tolist(),
            "constant": self.constant,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "tolerance_used": self.tolerance_used,
            "equality": self.equality,
            "passed": self.passed,
        }


def _check_profile(profile: EnergyProfile) -> None:
    if np.any(profile.bulk < settings.DEGENERATE_ENERGY):
        raise DegenerateSolutionError(
            f"Энергия {profile.label or 'решения'} ниже {settings.DEGENERATE_ENERGY:g}: "
            f"решение численно постоянно"
        )


def verify_monotonicity(
    profile: EnergyProfile, constant: float, tol: float = settings.ANALYTIC_TOL
) -> MonotonicityVerdict:
    """r·s(r) ≥ constant·g(r) в каждом радиусе лестницы."""
    if constant <= 0:
        raise DomainError(f"Константа должна быть положительной: {constant}")
    _check_profile(profile)
    return MonotonicityVerdict(
        kind="monotonicity",
        radii=profile.radii,
        ratios=profile.ratios,
        constant=float(constant),
        tolerance=tol,
        label=profile.label,
    )


def verify_2d_estimate(
    profile: EnergyProfile, lam: float, Lam: float, tol: float = settings.ANALYTIC_TOL
) -> MonotonicityVerdict:
    """
    g(r) ≤ (r√(Λ/λ)/2)·s(r) на плоскости.
    В вердикте ρ(r) - отношение правой части к g(r), константа 1.
    """
    if profile.n != 2:
        raise DimensionMismatchError(f"Двумерная оценка требует n = 2, профиль n = {profile.n}")
    _check_profile(profile)
    bound = profile.radii * np.sqrt(Lam / lam) / 2.0 * profile.surface
    return MonotonicityVerdict(
        kind="2d_estimate",
        radii=profile.radii,
        ratios=bound / profile.bulk,
        constant=1.0,
        tolerance=tol,
        label=profile.label,
    )


# ---------------------------------------------------------------------------
# Показатели
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentFit:
    """Наклоны log g и log osc по log r и следующие из них показатели."""

    n: int
    beta: float | None = None
    beta_stderr: float | None = None
    alpha_implied: float | None = None
    decay_residual: float | None = None
    alpha_osc: float | None = None
    osc_stderr: float | None = None
    osc_residual: float | None = None
    points: int = 0

    def merged(self, other: "ExponentFit") -> "ExponentFit":
        """Объединить подгонку убывания с подгонкой осцилляции."""
        changes = {
            name: getattr(other, name)
            for name in _FIT_FIELDS
            if getattr(other, name) is not None
        }
        return replace(self, **changes)

    @property
    def discrepancy(self) -> float | None:
        if self.alpha_implied is None or self.alpha_osc is None:
            return None
        return abs(self.alpha_implied - self.alpha_osc)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "beta": self.beta,
            "beta_stderr": self.beta_stderr,
            "alpha_implied": self.alpha_implied,
            "decay_residual": self.decay_residual,
            "alpha_osc": self.alpha_osc,
            "osc_stderr": self.osc_stderr,
            "osc_residual": self.osc_residual,
            "discrepancy": self.discrepancy,
            "points": self.points,
        }


def _check_ladder(radii: np.ndarray) -> None:
    if radii.size < MIN_FIT_POINTS:
        raise InsufficientLadderError(
            f"Для подгонки нужно ≥ {MIN_FIT_POINTS} радиусов, получено {radii.size}"
        )
    if radii[-1] / radii[0] < 10.0 * (1 - 1e-9):
        raise InsufficientLadderError(
            f"Лестница [{radii[0]:g}, {radii[-1]:g}] не покрывает декаду"
        )


def _fit(radii: np.ndarray, values: np.ndarray):
    fit = linregress(np.log(radii), np.log(values))
    predicted = fit.intercept + fit.slope * np.log(radii)
    return fit, float(np.max(np.abs(np.log(values) - predicted)))


def decay_exponent(profile: EnergyProfile) -> ExponentFit:
    """β - наклон log g по log r; α_implied = (β - (n-2))/2."""
    _check_ladder(profile.radii)
    _check_profile(profile)
    fit, worst = _fit(profile.radii, profile.bulk)
    return ExponentFit(
        n=profile.n,
        beta=float(fit.slope),
        beta_stderr=float(fit.stderr),
        alpha_implied=float((fit.slope - (profile.n - 2)) / 2.0),
        decay_residual=worst,
        points=int(profile.radii.size),
    )


def ball_samples(
    n: int, samples: int = settings.OSC_SAMPLES, seed: int = settings.DEFAULT_SEED
) -> np.ndarray:
    """Детерминированные точки Соболя в единичном шаре (отбор из куба [-1, 1]^n)."""
    engine = qmc.Sobol(d=n, scramble=True, seed=seed)
    cube = 2.0 * engine.random_base2(m=int(np.ceil(np.log2(max(samples, 2))))) - 1.0
    return cube[np.linalg.norm(cube, axis=1) <= 1.0]


def oscillation_exponent(
    sol: Solution,
    ladder: np.ndarray,
    samples: int = settings.OSC_SAMPLES,
    seed: int = settings.DEFAULT_SEED,
    rule: QuadratureRule | None = None,
) -> ExponentFit:
    """
    osc(B_r) = max - min по точкам Соболя и узлам сферы S_r.
    Оценка снизу: экстремумы ищутся только в выборке.
    """
    radii = np.asarray(ladder, dtype=float)
    _check_ladder(radii)
    rule = rule or QuadratureRule.default(sol.n)
    if rule.n != sol.n:
        raise DimensionMismatchError(f"Размерность правила {rule.n}, решения {sol.n}")
    base = np.concatenate([ball_samples(sol.n, samples, seed), rule.unit_sphere[0]])
    base_radius = np.linalg.norm(base, axis=1)

    oscillations = []
    for r in radii:
        keep = (base_radius * r >= sol.r_min) & (base_radius > 0)
        values = sol.value(r * base[keep])
        oscillations.append(float(values.max() - values.min()))
    oscillations = np.array(oscillations)
    if np.any(oscillations < settings.DEGENERATE_ENERGY):
        raise DegenerateSolutionError(f"Осцилляция {sol.name} ниже {settings.DEGENERATE_ENERGY:g}")

    fit, worst = _fit(radii, oscillations)
    return ExponentFit(
        n=sol.n,
        alpha_osc=float(fit.slope),
        osc_stderr=float(fit.stderr),
        osc_residual=worst,
        points=int(radii.size),
    )


# ---------------------------------------------------------------------------
# Оценка с учётом err
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ErrCorrectedVerdict:
    """(n-2)/(Λα̃)·err + α̃·g(1) ≤ s(1) и знак err."""

    err: float
    coefficient: float
    alpha_tilde: float
    bulk: float
    surface: float
    tolerance: float
    label: str = ""

    @property
    def bound(self) -> float:
        return self.coefficient * self.err + self.alpha_tilde * self.bulk

    @property
    def margin(self) -> float:
        return self.surface - self.bound

    @property
    def tolerance_used(self) -> float:
        return self.tolerance * self.alpha_tilde * self.bulk

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tolerance_used

    @property
    def err_sign(self) -> int:
        return int(np.sign(self.err))

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "err": self.err,
            "err_sign": self.err_sign,
            "coefficient": self.coefficient,
            "alpha_tilde": self.alpha_tilde,
            "bulk": self.bulk,
            "surface": self.surface,
            "bound": self.bound,
            "margin": self.margin,
            "tolerance_used": self.tolerance_used,
            "passed": self.passed,
        }


def verify_err_corrected(
    report: PohozaevReport,
    profile: EnergyProfile,
    n: int,
    lam: float,
    Lam: float,
    tol: float = settings.ANALYTIC_TOL,
) -> ErrCorrectedVerdict:
    """Сравнение в r = 1; радиус 1 обязан входить в лестницу профиля."""
    if report.n != n or profile.n != n:
        raise DimensionMismatchError(
            f"Размерности отчёта ({report.n}), профиля ({profile.n}) и n={n} различаются"
        )
    if report.label and profile.label and report.label != profile.label:
        raise DomainError(
            f"Отчёт ({report.label}) и профиль ({profile.label}) относятся к разным решениям"
        )
    bulk, surface = profile.at_radius(1.0)
    verdict = ErrCorrectedVerdict(
        err=report.err,
        coefficient=err_correction_coefficient(n, lam, Lam),
        alpha_tilde=surface_to_bulk_constant(n, lam, Lam),
        bulk=bulk,
        surface=surface,
        tolerance=tol,
        label=profile.label,
    )
    if verdict.err < 0:
        get_logger().warning(
            f"{profile.label}: err = {verdict.err:.3e} < 0, условие err ≥ 0 не выполнено"
        )
    return verdict


# ---------------------------------------------------------------------------
# Гармонический случай и Пуанкаре
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HarmonicPohozaevCheck:
    """
    ∫|u_T|² против ∫|u_N|² + (n-2)∫_{B_1}|∇u|²:
    равенство для гармонических u, обе односторонние формы и форма со всем градиентом.
    """

    n: int
    tangential: float
    normal: float
    bulk: float
    tolerance: float
    label: str = ""

    @property
    def rhs(self) -> float:
        return self.normal + (self.n - 2) * self.bulk

    @property
    def gap(self) -> float:
        return self.tangential - self.rhs

    @property
    def relative_gap(self) -> float:
        scale = max(abs(self.tangential), abs(self.rhs))
        return abs(self.gap) / scale if scale > 0 else 0.0

    @property
    def lower_form_holds(self) -> bool:
        """∫|u_T|² ≤ ∫|u_N|² + (n-2)∫|∇u|²."""
        return self.gap <= self.tolerance * max(self.rhs, 1.0)

    @property
    def upper_form_holds(self) -> bool:
        """∫|u_T|² ≥ ∫|u_N|² + (n-2)∫|∇u|²."""
        return self.gap >= -self.tolerance * max(self.rhs, 1.0)

    @property
    def full_gradient_margin(self) -> float:
        """∫_{S_1}|∇u|² - 2∫|u_N|² - (n-2)∫_{B_1}|∇u|²."""
        return self.tangential + self.normal - 2.0 * self.normal - (self.n - 2) * self.bulk

    @property
    def passed(self) -> bool:
        return self.relative_gap <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "n": self.n,
            "tangential": self.tangential,
            "normal": self.normal,
            "bulk": self.bulk,
            "gap": self.gap,
            "relative_gap": self.relative_gap,
            "lower_form_holds": self.lower_form_holds,
            "upper_form_holds": self.upper_form_holds,
            "full_gradient_margin": self.full_gradient_margin,
            "passed": self.passed,
        }


def verify_harmonic_pohozaev(
    sol: Solution, rule: QuadratureRule, tol: float = settings.POHOZAEV_ANALYTIC_TOL
) -> HarmonicPohozaevCheck:
    tangential, normal = tangential_normal_integrals(sol, 1.0, rule)
    return HarmonicPohozaevCheck(
        n=sol.n,
        tangential=tangential,
        normal=normal,
        bulk=bulk_energy(identity(sol.n), sol, 1.0, rule),
        tolerance=tol,
        label=sol.name,
    )


@dataclass(frozen=True)
class PoincareCheck:
    """(r²/(n-1))∫|u_T|² - ∫(u-k)² на S_r."""

    n: int
    r: float
    mean: float
    deviation: float
    tangential_bound: float
    tolerance: float
    label: str = ""

    @property
    def margin(self) -> float:
        return self.tangential_bound - self.deviation

    @property
    def relative_margin(self) -> float:
        scale = max(self.tangential_bound, self.deviation)
        return self.margin / scale if scale > 0 else 0.0

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tolerance * max(self.tangential_bound, 1.0)

    @property
    def equality(self) -> bool:
        return abs(self.relative_margin) <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "n": self.n,
            "r": self.r,
            "mean": self.mean,
            "deviation": self.deviation,
            "tangential_bound": self.tangential_bound,
            "margin": self.margin,
            "relative_margin": self.relative_margin,
            "equality": self.equality,
            "passed": self.passed,
        }


def verify_poincare(
    sol: Solution, r: float, rule: QuadratureRule, tol: float = 1e-10
) -> PoincareCheck:
    """Неравенство Пуанкаре на сфере S_r; равенство на первых сферических гармониках."""
    mean = sphere_mean(sol, r, rule)
    points, weights = rule.sphere(r)
    deviation = float(weights @ (sol.value(points) - mean) ** 2)
    tangential, _ = tangential_normal_integrals(sol, r, rule)
    return PoincareCheck(
        n=sol.n,
        r=r,
        mean=mean,
        deviation=deviation,
        tangential_bound=r**2 / (sol.n - 1) * tangential,
        tolerance=tol,
        label=sol.name,
    )


# ---------------------------------------------------------------------------
# Гипотеза уравнения
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HypothesisCheck:
    """Безмасштабная невязка |div(A∇u)|·|x|/|A∇u| по выборке точек."""

    worst: float
    median: float
    samples: int
    tolerance: float
    applicable: bool = True
    label: str = ""

    @property
    def passed(self) -> bool:
        return not self.applicable or self.worst <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "applicable": self.applicable,
            "worst": self.worst,
            "median": self.median,
            "samples": self.samples,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def pde_hypothesis_check(
    field: CoefficientField,
    sol: Solution,
    rule: QuadratureRule,
    tol: float = settings.ANALYTIC_TOL,
    max_samples: int = 512,
) -> HypothesisCheck:
    """
    Проверить, что пара (A, u) решает уравнение, по узлам квадратуры B_1.
    Для решений сетки проверка не применяется.
    """
    if not sol.is_analytic:
        return HypothesisCheck(0.0, 0.0, 0, tol, applicable=False, label=sol.name)
    points, _ = rule.ball(1.0)
    radius = np.linalg.norm(points, axis=1)
    points = points[radius >= max(1e-3, 10.0 * sol.r_min)]
    stride = max(1, points.shape[0] // max_samples)
    points = points[::stride]
    radius = np.linalg.norm(points, axis=1)

    divergence = np.abs(residual(field, sol, points, h=1e-4 * radius))
    flow = np.linalg.norm(flux(field, sol, points), axis=1)
    floor = 1e-3 * np.median(flow)
    denominator = np.maximum(flow, floor)
    scale_free = np.divide(
        divergence * radius, denominator, out=np.zeros_like(divergence), where=denominator > 0
    )
    check = HypothesisCheck(
        worst=float(scale_free.max()),
        median=float(np.median(scale_free)),
        samples=int(points.shape[0]),
        tolerance=tol,
        label=sol.name,
    )
    if not check.passed:
        get_logger().warning(
            f"{sol.name} не решает уравнение с полем {field.name}: "
            f"безмасштабная невязка {check.worst:.3e}"
        )
    return check


# ---------------------------------------------------------------------------
# Наивная константа
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NaiveComparison:
    """2√(n-1) против n-2 и измеренного отношения s(1)/g(1) для u = x₁, A = I."""

    n: int
    chain_constant: float
    threshold: float
    measured_ratio: float
    alpha_tilde: float

    @property
    def chain_fails(self) -> bool:
        """Наивная цепочка не даёт регулярности: 2√(n-1) < n-2."""
        return self.chain_constant < self.threshold

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "chain_constant": self.chain_constant,
            "threshold": self.threshold,
            "measured_ratio": self.measured_ratio,
            "alpha_tilde": self.alpha_tilde,
            "chain_fails": self.chain_fails,
            "measured_exceeds_chain": self.measured_ratio > self.chain_constant,
        }


def naive_constant_comparison(n: int, rule: QuadratureRule | None = None) -> NaiveComparison:
    rule = rule or QuadratureRule.compact(n, degree=2)
    field = identity(n)
    sol = affine(n)
    ratio = surface_energy(field, sol, 1.0, rule) / bulk_energy(field, sol, 1.0, rule)
    return NaiveComparison(
        n=n,
        chain_constant=naive_chain_constant(n),
        threshold=float(n - 2),
        measured_ratio=float(ratio),
        alpha_tilde=surface_to_bulk_constant(n, 1.0, 1.0),
    )

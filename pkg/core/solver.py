"""
Численное решение задачи Дирихле -div(A∇u) = 0 в единичном круге и шаре.
Single Responsibility: сетка, сборка, линейный решатель и восстановление градиента.

Дискретизация - вершинная схема контрольных объёмов, совпадающая с методом
Галёркина P1 на полярной сетке: логическая сетка (r, θ[, φ]) разбивается
на симплексы Куна, узлы в начале координат и на полюсах склеиваются.
A берётся в центрах тяжести элементов.
"""

from dataclasses import dataclass, field
from functools import cached_property
from itertools import permutations
from typing import Callable, Sequence

import numpy as np
from scipy import sparse
from scipy.interpolate import RegularGridInterpolator
from scipy.sparse.linalg import LinearOperator, cg, splu
from scipy.stats import linregress

from config.settings import settings
from core.coefficient import CoefficientField
from core.errors import (
    DimensionMismatchError,
    DomainError,
    InsufficientLadderError,
    SolverError,
)
from core.solutions import Solution
from services.logger import get_logger

BoundaryFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class BoundaryData:
    """
    Граничные данные на S_1.
    harmonic_extension - точное решение при A = I, если оно известно.
    """

    fn: BoundaryFunction
    label: str
    n: int
    harmonic_extension: BoundaryFunction | None = None

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.fn(points)


# ---------------------------------------------------------------------------
# Сетка
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PolarGrid:
    """
    Полярная сетка единичного шара.

    ids отображает логический индекс (i, j) или (i, k, j) в номер узла;
    i - радиальный индекс, k - полярный угол φ, j - азимут θ (периодичен).
    """

    n: int
    nr: int
    ntheta: int
    nphi: int
    grading: float
    radii: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    ids: np.ndarray
    points: np.ndarray
    simplices: np.ndarray
    ring: np.ndarray

    @classmethod
    def build(
        cls,
        n: int = 2,
        nr: int = settings.DEFAULT_NR,
        ntheta: int = settings.DEFAULT_NTHETA,
        nphi: int = settings.DEFAULT_NPHI,
        grading: float = settings.RADIAL_GRADING,
    ) -> "PolarGrid":
        """Радиусы r_i = (i/N_r)^grading; grading > 1 сгущает узлы к нулю."""
        if n not in (2, 3):
            raise DomainError(f"Решатель поддерживает только n ∈ {{2, 3}}: n={n}")
        sizes = {"nr": nr, "ntheta": ntheta}
        if n == 3:
            sizes["nphi"] = nphi
        for name, value in sizes.items():
            if value < settings.MIN_NODES_PER_DIRECTION:
                raise DomainError(
                    f"Нужно хотя бы {settings.MIN_NODES_PER_DIRECTION} узлов по направлению "
                    f"{name}: {value}"
                )
        if grading < 1.0:
            raise DomainError(f"Показатель сгущения должен быть ≥ 1: {grading}")

        radii = (np.arange(nr + 1) / nr) ** grading
        theta = 2.0 * np.pi * np.arange(ntheta) / ntheta
        if n == 2:
            return cls._build_disk(nr, ntheta, grading, radii, theta)
        phi = np.pi * np.arange(nphi + 1) / nphi
        return cls._build_ball(nr, ntheta, nphi, grading, radii, theta, phi)

    @classmethod
    def _build_disk(cls, nr, ntheta, grading, radii, theta) -> "PolarGrid":
        ids = np.zeros((nr + 1, ntheta), dtype=np.int64)
        ids[1:] = 1 + np.arange(nr * ntheta).reshape(nr, ntheta)

        points = np.zeros((1 + nr * ntheta, 2))
        rr, tt = np.meshgrid(radii, theta, indexing="ij")
        points[ids] = np.stack([rr * np.cos(tt), rr * np.sin(tt)], axis=-1)

        i, j = np.meshgrid(np.arange(nr), np.arange(ntheta), indexing="ij")
        i, j = i.ravel(), j.ravel()
        jn = (j + 1) % ntheta
        c00, c10, c01, c11 = ids[i, j], ids[i + 1, j], ids[i, jn], ids[i + 1, jn]
        simplices = np.concatenate(
            [np.stack([c00, c10, c11], axis=1), np.stack([c00, c01, c11], axis=1)]
        )

        ring = np.zeros(points.shape[0], dtype=np.int64)
        ring[ids] = np.arange(nr + 1)[:, None]
        return cls._finish(
            2, nr, ntheta, 0, grading, radii, theta, np.empty(0), ids, points, simplices, ring
        )

    @classmethod
    def _build_ball(cls, nr, ntheta, nphi, grading, radii, theta, phi) -> "PolarGrid":
        per_shell = 2 + (nphi - 1) * ntheta
        base = 1 + per_shell * np.arange(nr)
        ids = np.zeros((nr + 1, nphi + 1, ntheta), dtype=np.int64)
        ids[1:, 0, :] = base[:, None]
        ids[1:, 1:nphi, :] = (
            base[:, None, None] + 1 + np.arange((nphi - 1) * ntheta).reshape(nphi - 1, ntheta)
        )
        ids[1:, nphi, :] = (base + per_shell - 1)[:, None]

        rr, pp, tt = np.meshgrid(radii, phi, theta, indexing="ij")
        coords = np.stack(
            [rr * np.sin(pp) * np.cos(tt), rr * np.sin(pp) * np.sin(tt), rr * np.cos(pp)], axis=-1
        )
        points = np.zeros((1 + nr * per_shell, 3))
        points[ids] = coords

        i, k, j = (
            a.ravel()
            for a in np.meshgrid(np.arange(nr), np.arange(nphi), np.arange(ntheta), indexing="ij")
        )

        def corner(offset: np.ndarray) -> np.ndarray:
            return ids[i + offset[0], k + offset[1], (j + offset[2]) % ntheta]

        tets = []
        for order in permutations(range(3)):
            vertex = np.zeros(3, dtype=np.int64)
            chain = [corner(vertex)]
            for axis in order:
                vertex = vertex.copy()
                vertex[axis] = 1
                chain.append(corner(vertex))
            tets.append(np.stack(chain, axis=1))
        simplices = np.concatenate(tets)

        ring = np.zeros(points.shape[0], dtype=np.int64)
        ring[ids] = np.arange(nr + 1)[:, None, None]
        return cls._finish(
            3, nr, ntheta, nphi, grading, radii, theta, phi, ids, points, simplices, ring
        )

    @classmethod
    def _finish(cls, n, nr, ntheta, nphi, grading, radii, theta, phi, ids, points, simplices, ring):
        # Симплексы, стянутые в точку склейки, выбрасываются
        ordered = np.sort(simplices, axis=1)
        distinct = np.all(np.diff(ordered, axis=1) > 0, axis=1)
        simplices = simplices[distinct]
        edges = points[simplices[:, 1:]] - points[simplices[:, :1]]
        volumes = np.abs(np.linalg.det(edges))
        simplices = simplices[volumes > 1e-14 * volumes.max()]
        return cls(
            n=n,
            nr=nr,
            ntheta=ntheta,
            nphi=nphi,
            grading=grading,
            radii=radii,
            theta=theta,
            phi=phi,
            ids=ids,
            points=points,
            simplices=simplices,
            ring=ring,
        )

    @property
    def node_count(self) -> int:
        return self.points.shape[0]

    @property
    def boundary(self) -> np.ndarray:
        return self.ring == self.nr

    @property
    def dtheta(self) -> float:
        return 2.0 * np.pi / self.ntheta

    @property
    def dphi(self) -> float:
        return np.pi / self.nphi if self.nphi else 0.0

    @property
    def h(self) -> float:
        """Характерный шаг: 1/N_r."""
        return 1.0 / self.nr

    @cached_property
    def dual_cell_measures(self) -> np.ndarray:
        """
        Меры двойственных ячеек в полярных координатах: узлу принадлежит
        слой между серединами соседних радиусов и углов. Сумма равна |B_1|.
        """
        outer = np.append(0.5 * (self.radii[1:] + self.radii[:-1]), 1.0)
        inner = np.concatenate([[0.0], outer[:-1]])
        measures = np.zeros(self.node_count)
        if self.n == 2:
            annulus = 0.5 * (outer**2 - inner**2)
            measures[self.ids[1:]] = (annulus[1:] * self.dtheta)[:, None]
            measures[0] = np.pi * outer[0] ** 2
            return measures

        shell = (outer**3 - inner**3) / 3.0
        half = 0.5 * self.dphi
        start = np.clip(self.phi - half, 0.0, np.pi)
        stop = np.clip(self.phi + half, 0.0, np.pi)
        band = np.cos(start) - np.cos(stop)
        measures[self.ids[1:, 1:-1, :]] = (
            shell[1:, None, None] * band[None, 1:-1, None] * self.dtheta
        )
        measures[self.ids[1:, 0, 0]] = shell[1:] * band[0] * 2.0 * np.pi
        measures[self.ids[1:, -1, 0]] = shell[1:] * band[-1] * 2.0 * np.pi
        measures[0] = 4.0 * np.pi / 3.0 * outer[0] ** 3
        return measures

    def logical(self, values: np.ndarray) -> np.ndarray:
        """Узловой массив на логической сетке."""
        return np.asarray(values)[self.ids]

    def refined(self) -> "PolarGrid":
        """Сетка с удвоенным числом узлов по каждому направлению."""
        return PolarGrid.build(
            self.n, 2 * self.nr, 2 * self.ntheta, 2 * self.nphi, self.grading
        )

    def to_dict(self) -> dict:
        out = {
            "n": self.n,
            "nr": self.nr,
            "ntheta": self.ntheta,
            "grading": self.grading,
            "nodes": self.node_count,
            "simplices": int(self.simplices.shape[0]),
        }
        if self.n == 3:
            out["nphi"] = self.nphi
        return out


def grid_ladder(
    n: int, nr: int, ntheta: int, nphi: int = settings.DEFAULT_NPHI, levels: int = 3
) -> list[PolarGrid]:
    """Последовательность сеток с коэффициентом измельчения 2."""
    grids = [PolarGrid.build(n, nr, ntheta, nphi)]
    for _ in range(levels - 1):
        grids.append(grids[-1].refined())
    return grids


# ---------------------------------------------------------------------------
# Сборка
# ---------------------------------------------------------------------------


def _element_geometry(grid: PolarGrid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Объёмы, градиенты барицентрических функций (E, n+1, n) и центры тяжести."""
    vertices = grid.points[grid.simplices]
    edges = vertices[:, 1:] - vertices[:, :1]
    factorial = 2.0 if grid.n == 2 else 6.0
    volumes = np.abs(np.linalg.det(edges)) / factorial
    inner = np.linalg.inv(np.swapaxes(edges, 1, 2))
    gradients = np.concatenate([-inner.sum(axis=1, keepdims=True), inner], axis=1)
    return volumes, gradients, vertices.mean(axis=1)


def assemble_stiffness(field: CoefficientField, grid: PolarGrid) -> sparse.csr_matrix:
    """Матрица жёсткости K_ab = ∫⟨A∇φ_b,∇φ_a⟩ с A в центрах тяжести элементов."""
    if field.n != grid.n:
        raise DimensionMismatchError(f"Поле размерности {field.n}, сетка {grid.n}")
    volumes, gradients, centroids = _element_geometry(grid)
    mats = field.matrix(centroids)
    local = np.einsum("eai,eij,ebj->eab", gradients, mats, gradients) * volumes[:, None, None]

    size = grid.n + 1
    rows = np.repeat(grid.simplices, size, axis=1).ravel()
    cols = np.tile(grid.simplices, (1, size)).ravel()
    stiffness = sparse.coo_matrix(
        (local.ravel(), (rows, cols)), shape=(grid.node_count, grid.node_count)
    ).tocsr()
    return stiffness


def _ring_block_preconditioner(matrix: sparse.csr_matrix, rings: np.ndarray) -> LinearOperator:
    blocks = []
    for ring in np.unique(rings):
        index = np.flatnonzero(rings == ring)
        blocks.append((index, splu(matrix[index][:, index].tocsc())))

    def apply(vector: np.ndarray) -> np.ndarray:
        out = np.empty_like(vector)
        for index, factor in blocks:
            out[index] = factor.solve(vector[index])
        return out

    return LinearOperator(matrix.shape, matvec=apply, dtype=float)


# ---------------------------------------------------------------------------
# Решение
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GridSolution:
    """Узловые значения дискретного решения и отчёт решателя."""

    grid: PolarGrid
    values: np.ndarray
    stiffness: sparse.csr_matrix
    boundary_values: np.ndarray
    iterations: int
    residual: float
    method: str
    label: str = "grid"
    interpolation: str = field(default="linear")

    def discrete_energy(self, values: np.ndarray | None = None) -> float:
        """uᵀKu: дискретный интеграл Дирихле ∫⟨A∇u,∇u⟩."""
        vec = self.values if values is None else np.asarray(values, dtype=float)
        return float(vec @ (self.stiffness @ vec))

    def max_principle_gap(self) -> float:
        """Насколько внутренние значения выходят за [min, max] граничных данных (0, если нет)."""
        interior = self.values[~self.grid.boundary]
        low, high = self.boundary_values.min(), self.boundary_values.max()
        return float(max(0.0, interior.max() - high, low - interior.min()))

    def max_nodal_error(self, exact: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.max(np.abs(self.values - exact(self.grid.points))))

    @cached_property
    def nodal_gradients(self) -> np.ndarray:
        """∇u в узлах (N, n): центральные разности в логических координатах."""
        if self.grid.n == 2:
            return _disk_gradients(self.grid, self.values)
        return _ball_gradients(self.grid, self.values)

    @cached_property
    def _interpolators(self) -> tuple[RegularGridInterpolator, RegularGridInterpolator]:
        grid = self.grid
        axes = [grid.radii]
        if grid.n == 3:
            axes.append(grid.phi)
        axes.append(np.append(grid.theta, 2.0 * np.pi))

        def periodic(data: np.ndarray) -> np.ndarray:
            axis = grid.n - 1
            return np.concatenate([data, np.take(data, [0], axis=axis)], axis=axis)

        values = periodic(grid.logical(self.values))
        gradients = periodic(grid.logical(self.nodal_gradients))
        options = {"method": self.interpolation, "bounds_error": False, "fill_value": None}
        return (
            RegularGridInterpolator(tuple(axes), values, **options),
            RegularGridInterpolator(tuple(axes), gradients, **options),
        )

    def _grid_coordinates(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        radius = np.linalg.norm(pts, axis=1)
        theta = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2.0 * np.pi)
        clipped = np.clip(radius, 0.0, 1.0)
        if self.grid.n == 2:
            return np.stack([clipped, theta], axis=1)
        cos_phi = np.divide(pts[:, 2], radius, out=np.ones_like(radius), where=radius > 0)
        phi = np.arccos(np.clip(cos_phi, -1.0, 1.0))
        return np.stack([clipped, phi, theta], axis=1)

    def interpolate(self, points: np.ndarray) -> np.ndarray:
        return self._interpolators[0](self._grid_coordinates(points))

    def interpolate_gradient(self, points: np.ndarray) -> np.ndarray:
        return self._interpolators[1](self._grid_coordinates(points))

    def as_solution(self) -> Solution:
        """Решение с provenance="grid" для энергетического движка."""
        return Solution(
            n=self.grid.n,
            value_fn=self.interpolate,
            gradient_fn=self.interpolate_gradient,
            provenance="grid",
            name=self.label,
            metadata={"grid": self.grid.to_dict()},
        )

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "method": self.method,
            "iterations": self.iterations,
            "residual": self.residual,
            "grid": self.grid.to_dict(),
            "max_principle_gap": self.max_principle_gap(),
        }


def _periodic_derivative(data: np.ndarray, step: float, axis: int) -> np.ndarray:
    padded = np.concatenate(
        [np.take(data, [-1], axis=axis), data, np.take(data, [0], axis=axis)], axis=axis
    )
    derivative = np.gradient(padded, step, axis=axis)
    return np.take(derivative, np.arange(1, data.shape[axis] + 1), axis=axis)


def _first_mode(ring_values: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Коэффициенты при cos θ и sin θ (первая гармоника кольца)."""
    scale = 2.0 / theta.shape[0]
    return scale * np.array([ring_values @ np.cos(theta), ring_values @ np.sin(theta)])


def _disk_gradients(grid: PolarGrid, values: np.ndarray) -> np.ndarray:
    logical = grid.logical(values)
    u_r = np.gradient(logical, grid.radii, axis=0, edge_order=2)
    u_t = _periodic_derivative(logical, grid.dtheta, axis=1)
    cos, sin = np.cos(grid.theta), np.sin(grid.theta)
    r = grid.radii[1:, None]

    gradients = np.zeros((grid.node_count, 2))
    gradients[grid.ids[1:], 0] = u_r[1:] * cos - u_t[1:] / r * sin
    gradients[grid.ids[1:], 1] = u_r[1:] * sin + u_t[1:] / r * cos
    gradients[0] = _first_mode(logical[1], grid.theta) / grid.radii[1]
    return gradients


def _ball_gradients(grid: PolarGrid, values: np.ndarray) -> np.ndarray:
    logical = grid.logical(values)
    u_r = np.gradient(logical, grid.radii, axis=0, edge_order=2)
    u_p = np.gradient(logical, grid.dphi, axis=1, edge_order=2)
    u_t = _periodic_derivative(logical, grid.dtheta, axis=2)

    r = grid.radii[1:, None, None]
    phi = grid.phi[None, 1:-1, None]
    theta = grid.theta[None, None, :]
    sin_p, cos_p = np.sin(phi), np.cos(phi)
    sin_t, cos_t = np.sin(theta), np.cos(theta)
    radial = u_r[1:, 1:-1]
    polar = u_p[1:, 1:-1] / r
    azimuthal = u_t[1:, 1:-1] / (r * sin_p)

    gradients = np.zeros((grid.node_count, 3))
    inner_ids = grid.ids[1:, 1:-1]
    gradients[inner_ids, 0] = radial * sin_p * cos_t + polar * cos_p * cos_t - azimuthal * sin_t
    gradients[inner_ids, 1] = radial * sin_p * sin_t + polar * cos_p * sin_t + azimuthal * cos_t
    gradients[inner_ids, 2] = radial * cos_p - polar * sin_p

    # Полюса: осевая компонента - производная вдоль оси, поперечные - по соседнему кольцу
    ring_radius = grid.radii[1:] * np.sin(grid.dphi)
    for pole, neighbour, sign in ((0, 1, 1.0), (grid.nphi, grid.nphi - 1, -1.0)):
        ids = grid.ids[1:, pole, 0]
        gradients[ids, 2] = sign * u_r[1:, pole, 0]
        for shell in range(grid.nr):
            gradients[ids[shell], :2] = (
                _first_mode(logical[shell + 1, neighbour], grid.theta) / ring_radius[shell]
            )

    shell_ids = np.unique(grid.ids[1])
    offsets = grid.points[shell_ids]
    gradients[0] = np.linalg.lstsq(offsets, values[shell_ids] - values[0], rcond=None)[0]
    return gradients


def solve_dirichlet(
    field: CoefficientField,
    boundary: BoundaryFunction,
    grid: PolarGrid,
    method: str = settings.SOLVER_METHOD,
    rtol: float = settings.SOLVER_RTOL,
    label: str | None = None,
) -> GridSolution:
    """
    Решить -div(A∇u) = 0 с u = boundary на S_1.
    SolverError, если CG не достиг rtol за 50·√N итераций.
    """
    if field.n != grid.n:
        raise DimensionMismatchError(f"Поле размерности {field.n}, сетка {grid.n}")
    if method not in ("cg", "direct"):
        raise DomainError(f"Неизвестный метод решателя: {method}")
    logger = get_logger()

    stiffness = assemble_stiffness(field, grid)
    on_boundary = grid.boundary
    interior = np.flatnonzero(~on_boundary)
    fixed = np.flatnonzero(on_boundary)
    boundary_values = np.asarray(boundary(grid.points[fixed]), dtype=float)

    system = stiffness[interior][:, interior].tocsr()
    rhs = -(stiffness[interior][:, fixed] @ boundary_values)
    logger.info(
        f"Сборка: {grid.node_count} узлов, {grid.simplices.shape[0]} элементов, "
        f"{interior.size} неизвестных"
    )

    iterations = 0
    rhs_norm = np.linalg.norm(rhs)
    if rhs_norm == 0.0:
        solution = np.zeros(interior.size)
    elif method == "direct":
        solution = splu(system.tocsc()).solve(rhs)
    else:
        cap = int(settings.SOLVER_ITERATION_FACTOR * np.sqrt(interior.size))

        def count(_):
            nonlocal iterations
            iterations += 1

        preconditioner = _ring_block_preconditioner(system, grid.ring[interior])
        solution, info = cg(
            system, rhs, rtol=rtol, atol=0.0, maxiter=cap, M=preconditioner, callback=count
        )
        achieved = float(np.linalg.norm(rhs - system @ solution) / rhs_norm)
        if info != 0:
            raise SolverError(
                f"CG не сошёлся за {iterations} итераций (лимит {cap}): "
                f"относительная невязка {achieved:.3e}",
                residual=achieved,
                iterations=iterations,
            )

    achieved = float(np.linalg.norm(rhs - system @ solution) / rhs_norm) if rhs_norm else 0.0
    values = np.empty(grid.node_count)
    values[interior] = solution
    values[fixed] = boundary_values
    logger.info(f"Решатель {method}: итераций {iterations}, относительная невязка {achieved:.3e}")

    return GridSolution(
        grid=grid,
        values=values,
        stiffness=stiffness,
        boundary_values=boundary_values,
        iterations=iterations,
        residual=achieved,
        method=method,
        label=label or f"grid:{field.name}",
    )


# ---------------------------------------------------------------------------
# Сходимость
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceReport:
    """Наблюдаемый порядок по лестнице сеток."""

    steps: np.ndarray
    errors: np.ndarray
    order: float
    stderr: float
    exact: bool
    reference: str

    def to_dict(self) -> dict:
        return {
            "steps": self.steps.tolist(),
            "errors": self.errors.tolist(),
            "order": self.order if np.isfinite(self.order) else "inf",
            "stderr": self.stderr,
            "exact": self.exact,
            "reference": self.reference,
        }


def _coarse_nodes_in_fine(fine: PolarGrid) -> np.ndarray:
    """Номера узлов мелкой сетки, совпадающих с узлами сетки вдвое грубее."""
    return fine.ids[(slice(None, None, 2),) * fine.ids.ndim]


def convergence_study(
    field: CoefficientField,
    boundary: BoundaryFunction,
    grids: Sequence[PolarGrid],
    reference: Callable[[np.ndarray], np.ndarray] | None = None,
    method: str = settings.SOLVER_METHOD,
) -> ConvergenceReport:
    """
    Наклон log(ошибки) по log(h).

    С точным решением ошибка - максимум по узлам; без него - максимум
    разности последовательных решений в узлах грубой сетки.
    """
    if len(grids) < 3:
        raise InsufficientLadderError(f"Для оценки порядка нужно ≥ 3 сетки: {len(grids)}")
    for coarse, fine in zip(grids, grids[1:]):
        sizes = np.array([coarse.nr, coarse.ntheta, coarse.nphi])
        if not np.array_equal([fine.nr, fine.ntheta, fine.nphi], 2 * sizes):
            raise DomainError("Сетки лестницы должны измельчаться ровно вдвое")
    logger = get_logger()

    solutions = [solve_dirichlet(field, boundary, grid, method=method) for grid in grids]
    steps = np.array([grid.h for grid in grids])
    if reference is not None:
        errors = np.array([s.max_nodal_error(reference) for s in solutions])
        kind = "analytic"
    else:
        errors = np.array(
            [
                np.max(np.abs(c.values[c.grid.ids] - f.values[_coarse_nodes_in_fine(f.grid)]))
                for c, f in zip(solutions, solutions[1:])
            ]
        )
        steps = steps[:-1]
        kind = "successive"

    scale = max(1.0, float(np.max(np.abs(solutions[-1].boundary_values))))
    if np.all(errors <= settings.SOLVER_EXACT_TOL * scale):
        logger.info("Дискретные решения точны на всех сетках: порядок не определён")
        return ConvergenceReport(steps, errors, float("inf"), 0.0, True, kind)

    fit = linregress(np.log(steps), np.log(errors))
    logger.info(f"Наблюдаемый порядок {fit.slope:.3f} ± {fit.stderr:.3f} ({kind})")
    return ConvergenceReport(steps, errors, float(fit.slope), float(fit.stderr), False, kind)

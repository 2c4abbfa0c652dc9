"""Общие фикстуры тестов."""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from core.quadrature import QuadratureRule  # noqa: E402
from core.solver import PolarGrid  # noqa: E402


@pytest.fixture(scope="session")
def rule2() -> QuadratureRule:
    return QuadratureRule.default(2)


@pytest.fixture(scope="session")
def rule3() -> QuadratureRule:
    return QuadratureRule.default(3)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_disk() -> PolarGrid:
    return PolarGrid.build(2, 16, 32)


@pytest.fixture(scope="session")
def small_ball() -> PolarGrid:
    return PolarGrid.build(3, 8, 16, 8)


@pytest.fixture
def ball_points(rng):
    """Фабрика случайных точек в кольце r_low ≤ |x| ≤ 1."""

    def sample(n: int, count: int, r_low: float = 0.05) -> np.ndarray:
        directions = rng.standard_normal((count, n))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        radii = rng.uniform(r_low, 1.0, size=count)
        return directions * radii[:, None]

    return sample

import numpy as np
import pytest

from core.coefficient import (
    CoefficientField,
    PolarBlocks,
    _with_descriptor,
    check_bounds,
    check_ellipticity,
    constant,
    from_descriptor,
    identity,
    layered,
    polar_conjugate,
    polar_frame,
    polar_frames,
    ps2d,
    radial,
    random_constant,
    schur_complement_minimum,
    schur_gap,
)
from core.errors import (
    CapabilityError,
    DimensionMismatchError,
    DomainError,
    OrderingError,
    SpecError,
    SymmetryError,
)


def test_check_bounds_rejects_bad_ordering():
    with pytest.raises(OrderingError):
        check_bounds(2.0, 1.0)
    with pytest.raises(OrderingError):
        check_bounds(0.0, 1.0)
    with pytest.raises(OrderingError):
        check_bounds(1.0, np.inf)


def test_ordering_error_is_value_error():
    with pytest.raises(ValueError):
        check_bounds(3.0, 1.0)


def test_constant_rejects_asymmetric_matrix():
    with pytest.raises(SymmetryError):
        constant([[1.0, 2.0], [0.0, 1.0]])


def test_constant_rejects_non_square_matrix():
    with pytest.raises(SpecError):
        constant([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


def test_constant_bounds_default_to_spectrum():
    field = constant([[2.0, 1.0], [1.0, 2.0]])
    assert field.lam == pytest.approx(1.0)
    assert field.Lam == pytest.approx(3.0)


def test_matrix_shapes_for_single_point_and_batch():
    field = identity(3)
    assert field.matrix(np.zeros(3)).shape == (3, 3)
    assert field.matrix(np.zeros((5, 3))).shape == (5, 3, 3)
    with pytest.raises(DimensionMismatchError):
        field.matrix(np.zeros(2))


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("seed", range(10))
def test_random_constant_attains_both_bounds(seed, n):
    rng = np.random.default_rng(seed)
    field = random_constant(n, 1.0, 4.0, rng)
    eigenvalues = np.linalg.eigvalsh(field.matrix(np.zeros(n)))
    assert eigenvalues[0] == pytest.approx(1.0, abs=1e-12)
    assert eigenvalues[-1] == pytest.approx(4.0, abs=1e-12)

    points = rng.uniform(-0.5, 0.5, size=(20, n))
    assert check_ellipticity(field, points, rng=rng).passed


def test_check_ellipticity_flags_wrong_declared_bounds(rng):
    field = constant(np.diag([1.0, 4.0]), lam=2.0, Lam=4.0)
    verdict = check_ellipticity(field, np.zeros((3, 2)), rng=rng)
    assert not verdict.passed
    assert verdict.min_quotient == pytest.approx(1.0)


def test_check_ellipticity_requires_points_in_ball(rng):
    with pytest.raises(DomainError):
        check_ellipticity(identity(2), np.array([[2.0, 0.0]]), rng=rng)


def test_ps2d_eigenvectors_are_radial_and_tangential():
    field = ps2d(1.0, 4.0)
    x = np.array([0.3, 0.4])
    unit = x / np.linalg.norm(x)
    tangent = np.array([-unit[1], unit[0]])
    A = field.matrix(x)
    np.testing.assert_allclose(A @ unit, 4.0 * unit, atol=1e-14)
    np.testing.assert_allclose(A @ tangent, 1.0 * tangent, atol=1e-14)


def test_ps2d_undefined_at_origin():
    with pytest.raises(DomainError):
        ps2d(1.0, 4.0).matrix(np.zeros(2))


@pytest.mark.parametrize("builder", [ps2d, lambda a, b: radial(2, 0.7), lambda a, b: layered(2, 0.7)])
def test_analytic_derivatives_match_finite_differences(builder, ball_points):
    field = builder(1.0, 3.0)
    approximate = field.with_finite_difference_derivatives(h=1e-6)
    points = ball_points(2, 25, r_low=0.2)
    np.testing.assert_allclose(
        field.derivatives(points), approximate.derivatives(points), atol=1e-7
    )
    assert approximate.derivative_is_approximate


def test_constant_field_has_zero_derivatives():
    values = constant(np.diag([1.0, 2.0, 3.0])).derivatives(np.ones((4, 3)) * 0.1)
    assert values.shape == (4, 3, 3, 3)
    assert not np.any(values)


def test_variable_field_without_derivatives_raises():
    field = CoefficientField(
        n=2,
        evaluator=lambda pts: np.broadcast_to(np.eye(2), (pts.shape[0], 2, 2)).copy(),
        lam=1.0,
        Lam=1.0,
        kind="variable",
    )
    assert not field.has_derivatives
    with pytest.raises(CapabilityError):
        field.derivatives(np.zeros(2))


def test_from_descriptor_rebuilds_builtin_fields():
    field = from_descriptor(ps2d(1.0, 9.0).to_descriptor())
    assert (field.lam, field.Lam) == (1.0, 9.0)
    assert from_descriptor({"kind": "builtin", "name": "layered", "n": 3, "eps": 0.5}).n == 3
    with pytest.raises(SpecError):
        from_descriptor({"kind": "builtin", "name": "unknown"})
    with pytest.raises(SpecError):
        from_descriptor({"kind": "constant"})


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_polar_frames_are_orthogonal_with_radial_first_column(n, ball_points):
    points = ball_points(n, 50)
    frames = polar_frames(points)
    identity_batch = np.einsum("mji,mjk->mik", frames, frames)
    np.testing.assert_allclose(identity_batch, np.broadcast_to(np.eye(n), identity_batch.shape), atol=1e-12)
    unit = points / np.linalg.norm(points, axis=1, keepdims=True)
    np.testing.assert_allclose(frames[:, :, 0], unit, atol=1e-12)


def test_polar_frame_on_first_axis_is_identity():
    np.testing.assert_allclose(polar_frames(np.array([[0.5, 0.0, 0.0]]))[0], np.eye(3))


def test_polar_frames_undefined_at_origin():
    with pytest.raises(DomainError):
        polar_frames(np.zeros((1, 3)))


@pytest.mark.parametrize("seed", range(20))
def test_schur_gap_nonnegative_for_elliptic_fields(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    lam, Lam = sorted(rng.uniform(0.5, 5.0, size=2))
    field = random_constant(n, lam, Lam, rng)
    x = rng.standard_normal(n)
    x *= rng.uniform(0.1, 1.0) / np.linalg.norm(x)
    blocks = polar_conjugate(field, x)
    xi = rng.standard_normal(n - 1)
    assert schur_gap(blocks, lam, xi) >= -1e-10 * max(1.0, Lam**2)


@pytest.mark.parametrize("seed", range(5))
def test_polar_conjugate_preserves_spectrum(seed):
    rng = np.random.default_rng(seed)
    field = random_constant(4, 1.0, 3.0, rng)
    x = rng.uniform(-0.4, 0.4, size=4)
    blocks = polar_conjugate(field, x)
    np.testing.assert_allclose(
        np.linalg.eigvalsh(blocks.matrix), np.linalg.eigvalsh(field.matrix(x)), atol=1e-12
    )


def test_schur_complement_minimum_matches_minimiser():
    P = np.array([[2.0, 0.5, -0.3], [0.5, 3.0, 0.2], [-0.3, 0.2, 1.5]])
    blocks = PolarBlocks.from_matrix(P, np.eye(3))
    xi = np.array([0.7, -1.1])
    t_star = -(blocks.P12 @ xi) / blocks.p11
    v = np.concatenate([[t_star], xi])
    assert schur_complement_minimum(blocks, xi) == pytest.approx(v @ P @ v, rel=1e-12)
    for t in np.linspace(-2.0, 2.0, 41):
        w = np.concatenate([[t], xi])
        assert w @ P @ w >= schur_complement_minimum(blocks, xi) - 1e-12


def test_schur_rejects_bad_tangent_vectors():
    blocks = PolarBlocks.from_matrix(np.eye(3), np.eye(3))
    with pytest.raises(DomainError):
        schur_gap(blocks, 1.0, np.zeros(2))
    with pytest.raises(DimensionMismatchError):
        schur_complement_minimum(blocks, np.ones(3))


@pytest.mark.parametrize(
    "field",
    [ps2d(1.0, 4.0), layered(3, 0.5), radial(3, 0.3), random_constant(4, 1.0, 3.0, np.random.default_rng(3))],
    ids=["ps2d", "layered", "radial", "random4"],
)
def test_polar_blocks_reconstruct_field(field, ball_points):
    for x in ball_points(field.n, 30, r_low=0.1):
        Q = polar_frame(x)
        rebuilt = Q @ polar_conjugate(field, x).matrix @ Q.T
        np.testing.assert_allclose(rebuilt, field.matrix(x), atol=1e-12)


def test_descriptor_copy_keeps_approximate_derivatives(ball_points):
    approximate = layered(2, 0.5).with_finite_difference_derivatives()
    relabelled = _with_descriptor(approximate, {"kind": "custom", "name": "relabelled"})
    assert relabelled.derivative_is_approximate
    assert relabelled.to_descriptor()["name"] == "relabelled"
    points = ball_points(2, 5)
    np.testing.assert_array_equal(relabelled.derivatives(points), approximate.derivatives(points))

import numpy as np
import pytest

from core.coefficient import identity, ps2d
from core.errors import OrderingError, SpecError, SymmetryError
from core.specs import dimension_hint, parse_boundary, parse_field, parse_solution, parse_sweep


class TestParseField:
    def test_identity_dimension(self):
        assert parse_field("identity").n == 2
        assert parse_field("identity:n=3").n == 3
        assert parse_field("identity", n=4).n == 4

    def test_constant_forms(self):
        field = parse_field("const:diag(1,4)")
        assert (field.lam, field.Lam) == (pytest.approx(1.0), pytest.approx(4.0))
        assert field.is_constant
        matrix = parse_field("const:[[2,1],[1,2]]")
        np.testing.assert_allclose(matrix.matrix(np.zeros(2)), [[2.0, 1.0], [1.0, 2.0]])

    def test_random_constant_uses_bounds_and_generator(self):
        first = parse_field("const:random", n=3, lam=1.0, Lam=2.0, rng=np.random.default_rng(7))
        second = parse_field("const:random", n=3, lam=1.0, Lam=2.0, rng=np.random.default_rng(7))
        np.testing.assert_array_equal(first.matrix(np.zeros(3)), second.matrix(np.zeros(3)))
        eigenvalues = np.linalg.eigvalsh(first.matrix(np.zeros(3)))
        assert eigenvalues[0] == pytest.approx(1.0) and eigenvalues[-1] == pytest.approx(2.0)

    def test_builtin_variable_fields(self):
        assert (parse_field("ps2d:1,4").lam, parse_field("ps2d:1,4").Lam) == (1.0, 4.0)
        assert parse_field("ps2d:lambda=2,Lambda=3").Lam == 3.0
        assert parse_field("radial:n=2,eps=0.5").Lam == pytest.approx(1.5)
        assert parse_field("layered:n=3,eps=0.5").n == 3

    def test_json_descriptor(self):
        field = parse_field('{"kind": "builtin", "name": "layered", "n": 3, "eps": 0.25}')
        assert field.n == 3 and field.Lam == pytest.approx(1.25)

    @pytest.mark.parametrize(
        "spec", ["unknown", "ps2d:1", "const:diag(a,b)", "const:eye", "{oops", "radial:n=2"]
    )
    def test_rejects_malformed(self, spec):
        with pytest.raises(SpecError):
            parse_field(spec)

    def test_matrix_errors_keep_their_type(self):
        with pytest.raises(SymmetryError):
            parse_field("const:[[1,2],[0,1]]")
        with pytest.raises(OrderingError):
            parse_field("ps2d:4,1")


class TestParseSolution:
    def test_affine_follows_field_dimension(self):
        assert parse_solution("affine", field=identity(3)).n == 3
        sol = parse_solution("affine:1,2")
        assert sol.n == 2
        assert sol.value(np.array([1.0, 1.0])) == pytest.approx(3.0)

    def test_harmonic(self):
        sol = parse_solution("harmonic:n=3,k=2,i=0")
        assert (sol.n, sol.degree) == (3, 2)

    def test_ps_solution_takes_field_parameters(self):
        sol = parse_solution("ps2d", field=ps2d(1.0, 9.0))
        assert sol.metadata["alpha"] == pytest.approx(1.0 / 3.0)
        assert parse_solution("ps2d:lambda=1,Lambda=4").metadata["alpha"] == pytest.approx(0.5)
        with pytest.raises(SpecError):
            parse_solution("ps2d", field=identity(2))

    def test_norm_squared(self):
        assert parse_solution("norm2:n=3").n == 3

    def test_random_harmonic_is_seeded(self, ball_points):
        first = parse_solution("random:n=2,k=3", rng=np.random.default_rng(5))
        second = parse_solution("random:n=2,k=3", rng=np.random.default_rng(5))
        other = parse_solution("random:n=2,k=3", rng=np.random.default_rng(6))
        points = ball_points(2, 20)
        np.testing.assert_array_equal(first.value(points), second.value(points))
        assert not np.allclose(first.value(points), other.value(points))
        assert parse_solution("random:n=3", rng=np.random.default_rng(1)).n == 3

    def test_random_harmonic_needs_positive_degree(self):
        with pytest.raises(SpecError):
            parse_solution("random:n=2,k=0")

    @pytest.mark.parametrize("spec", ["bogus", "harmonic:k=x", "harmonic:n=3", "affine:1,a"])
    def test_rejects_malformed(self, spec):
        with pytest.raises(SpecError):
            parse_solution(spec)


class TestParseBoundary:
    def test_single_harmonic_and_extension(self, ball_points):
        data = parse_boundary("cos(2*theta)", 2)
        angles = np.linspace(0.0, 2.0 * np.pi, 9)
        circle = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        np.testing.assert_allclose(data(circle), np.cos(2.0 * angles), atol=1e-14)
        points = ball_points(2, 10)
        expected = points[:, 0] ** 2 - points[:, 1] ** 2
        np.testing.assert_allclose(data.harmonic_extension(points), expected, atol=1e-12)

    def test_cos_theta_equals_first_coordinate_on_circle(self):
        data = parse_boundary("cos(theta)", 2)
        angles = np.linspace(0.0, 2.0 * np.pi, 13)
        circle = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        np.testing.assert_allclose(data(circle), circle[:, 0], atol=1e-14)

    def test_sums_with_coefficients(self):
        data = parse_boundary("x1 + 0.5*x2 - 2", 2)
        points = np.array([[1.0, 0.0], [0.0, 1.0]])
        np.testing.assert_allclose(data(points), [-1.0, -1.5])
        np.testing.assert_allclose(data.harmonic_extension(np.zeros((1, 2))), [-2.0])

    def test_spherical_boundary_has_no_closed_extension(self):
        data = parse_boundary("sin(theta)*cos(phi)", 3)
        assert data.harmonic_extension is None
        # на оси x: theta = 0, phi = π/2
        assert data(np.array([[1.0, 0.0, 0.0]]))[0] == pytest.approx(0.0, abs=1e-15)
        assert data(np.array([[0.0, 1.0, 0.0]]))[0] == pytest.approx(np.cos(np.pi / 2), abs=1e-15)

    @pytest.mark.parametrize(
        "spec, n", [("", 2), ("tan(theta)", 2), ("cos(phi)", 2), ("x3", 2), ("cos(theta)+", 2)]
    )
    def test_rejects_malformed(self, spec, n):
        with pytest.raises(SpecError):
            parse_boundary(spec, n)


class TestParseSweep:
    def test_grid(self):
        ns, ratios = parse_sweep("n=2..8,ratio=0.1..1.0x10")
        assert ns == list(range(2, 9))
        np.testing.assert_allclose(ratios, np.linspace(0.1, 1.0, 10))

    @pytest.mark.parametrize(
        "spec", ["n=2..8", "n=1..3,ratio=0.1..1x2", "n=2..3,ratio=0..1x2", "n=a..3,ratio=0.1..1x2"]
    )
    def test_rejects_malformed(self, spec):
        with pytest.raises(SpecError):
            parse_sweep(spec)


@pytest.mark.parametrize(
    "solution, boundary, expected",
    [
        ("harmonic:n=3,k=1,i=0", None, 3),
        ("norm2:n=4", None, 4),
        ("affine:1,0,0", None, 3),
        ("ps2d", None, 2),
        ("random:n=3,k=2", None, 3),
        ("ps2d:lambda=1,Lambda=4", None, 2),
        ("affine", None, None),
        (None, "sin(theta)*cos(phi)", 3),
        (None, "x1+x3", 3),
        (None, "cos(theta)", None),
    ],
)
def test_dimension_hint(solution, boundary, expected):
    assert dimension_hint(solution, boundary) == expected

import numpy as np
import pytest

from core.errors import DomainError, OrderingError
from core.exponent import (
    SWEEP_COLUMNS,
    crossover_ratio,
    eps_limit,
    eps_star,
    err_correction_coefficient,
    exponent_bound,
    holder_exponent,
    naive_chain_constant,
    optimize_eps_T,
    remark_coefficient,
    step5_objective,
    surface_to_bulk_constant,
    sweep,
)


def test_planar_exponent_is_square_root_of_ratio(rng):
    for _ in range(100):
        lam, Lam = np.sort(rng.uniform(0.1, 10.0, size=2))
        assert holder_exponent(2, lam, Lam) == pytest.approx(np.sqrt(lam / Lam), rel=1e-12)


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_isotropic_case(n):
    assert surface_to_bulk_constant(n, 2.0, 2.0) == pytest.approx(n)
    assert holder_exponent(n, 2.0, 2.0) == pytest.approx(1.0)
    assert eps_star(n, 1.0, 1.0) == pytest.approx(1.0)
    assert eps_limit(n, 1.0, 1.0) == pytest.approx(np.sqrt(n - 1))


def test_exponent_decreases_with_contrast():
    values = [holder_exponent(3, 1.0, Lam) for Lam in (1.0, 2.0, 4.0, 16.0)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert all(0.0 < v <= 1.0 for v in values)


def test_real_dimension_is_allowed_in_closed_forms():
    assert surface_to_bulk_constant(2.5, 1.0, 2.0) == pytest.approx(np.sqrt(0.25 + 3.0))


def test_invalid_arguments():
    with pytest.raises(DomainError):
        holder_exponent(1, 1.0, 2.0)
    with pytest.raises(OrderingError):
        holder_exponent(3, 2.0, 1.0)
    with pytest.raises(DomainError):
        naive_chain_constant(1.5)


def test_err_coefficient_vanishes_in_the_plane():
    assert err_correction_coefficient(2, 1.0, 4.0) == 0.0
    assert err_correction_coefficient(3, 1.0, 1.0) == pytest.approx(1.0 / 3.0)


def test_naive_chain_constant_beats_n_minus_2_only_in_high_dimension():
    for n in range(7, 13):
        assert naive_chain_constant(n) < n - 2
    assert naive_chain_constant(6) > 4


@pytest.mark.parametrize("n, expected", [(2, 1.0), (3, 0.875), (6, 0.2), (7, 0.0), (12, 0.0)])
def test_crossover_ratio(n, expected):
    assert crossover_ratio(n) == pytest.approx(expected)


def test_crossover_is_where_constants_meet():
    ratio = crossover_ratio(4)
    assert surface_to_bulk_constant(4, ratio, 1.0) == pytest.approx(2.0 * np.sqrt(3.0))
    assert surface_to_bulk_constant(4, ratio, 1.0) == pytest.approx(naive_chain_constant(4))


@pytest.mark.parametrize("n, lam, Lam", [(2, 1.0, 4.0), (3, 1.0, 4.0), (5, 0.3, 1.7), (4, 1.0, 1.0)])
def test_objective_at_closed_form_equals_alpha_tilde(n, lam, Lam):
    value = step5_objective(eps_star(n, lam, Lam), n * Lam, n, lam, Lam)
    assert value == pytest.approx(surface_to_bulk_constant(n, lam, Lam), rel=1e-12)


def test_objective_domain_checks():
    with pytest.raises(DomainError):
        step5_objective(0.0, 3.0, 3, 1.0, 1.0)
    with pytest.raises(DomainError):
        step5_objective(1.0, 10.0, 3, 1.0, 2.0)


def test_remark_coefficient_matches_err_weight_at_optimum():
    assert remark_coefficient(1.0, 3, 1.0, 1.0) == pytest.approx(1.0 / 3.0)
    e = eps_star(4, 1.0, 3.0)
    assert remark_coefficient(e, 4, 1.0, 3.0) == pytest.approx(err_correction_coefficient(4, 1.0, 3.0))


@pytest.mark.parametrize("n, lam, Lam", [(2, 1.0, 4.0), (3, 1.0, 4.0), (5, 0.3, 1.7)])
def test_optimizer_recovers_closed_form(n, lam, Lam):
    result = optimize_eps_T(n, lam, Lam, resolution=400)
    assert result.passed
    assert result.T_hat == pytest.approx(n * Lam)
    assert result.increasing_in_T
    payload = result.to_dict()
    assert payload["Lambda"] == Lam and payload["passed"] is True


def test_optimizer_on_random_tuples(rng):
    for _ in range(50):
        n = int(rng.integers(2, 9))
        Lam = float(rng.uniform(0.5, 5.0))
        lam = float(Lam * rng.uniform(0.05, 1.0))
        assert optimize_eps_T(n, lam, Lam, resolution=200).passed, (n, lam, Lam)


def test_optimizer_isotropic_single_T():
    result = optimize_eps_T(3, 1.0, 1.0, resolution=100)
    assert result.T_hat == 3.0
    assert result.eps_star == pytest.approx(1.0)


def test_optimizer_rejects_bad_arguments():
    with pytest.raises(DomainError):
        optimize_eps_T(3, 1.0, 2.0, resolution=50)
    with pytest.raises(DomainError):
        optimize_eps_T(2.5, 1.0, 2.0)


def test_sweep_table_order_and_size():
    rows = sweep(range(2, 9), np.linspace(0.1, 1.0, 10))
    assert len(rows) == 70
    assert (rows[0].n, rows[0].lam) == (2, pytest.approx(0.1))
    assert rows[10].n == 3
    assert len(rows[0].sweep_row()) == len(SWEEP_COLUMNS)


def test_exponent_bound_payload():
    payload = exponent_bound(2, 1.0, 4.0).to_dict()
    assert payload["alpha"] == pytest.approx(0.5)
    assert payload["T_star"] == pytest.approx(8.0)
    assert set(payload) >= {"lambda", "Lambda", "alpha_tilde", "eps_star", "err_coefficient"}


def test_closed_form_gap_on_special_cases(rng):
    for _ in range(100):
        lam, Lam = np.sort(rng.uniform(0.1, 10.0, size=2))
        assert exponent_bound(2, lam, Lam).closed_form_gap <= 1e-12
    for n in range(2, 11):
        assert exponent_bound(n, 3.0, 3.0).closed_form_gap <= 1e-12
    assert exponent_bound(3, 1.0, 2.0).closed_form_gap == 0.0

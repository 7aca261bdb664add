import numpy as np
import pytest

from app.fem import Mesh1D, SineSeries, assemble, l2_project
from app.noise import NoiseModel
from app.schema import DriftKind
from app.spectral import (
    check_admissibility,
    discrete_semigroup,
    exact_linear_deterministic,
    fractional_norm,
    growth_rates,
    make_basis,
    modal_coefficients,
    ou_moments,
    recover_modes,
)


@pytest.mark.parametrize(
    "beta, s, admissible",
    [(1.0, 0.5005, True), (0.5, 0.0005, True), (1.0, 0.5, False)],
)
def test_admissibility_reference_cases(beta, s, admissible):
    report = check_admissibility(beta, s)
    assert report.admissible is admissible
    assert report.divergent is (not admissible)
    assert report.bound == pytest.approx(s + 0.5)


def test_admissibility_ignores_the_truncated_sum():
    # the truncated sum is finite even on the boundary
    report = check_admissibility(1.0, 0.5, J=100)
    assert np.isfinite(report.hs_norm_sq)
    assert not report.admissible
    assert ">=" in report.describe()


def test_growth_rate_of_second_mode():
    lam = (2 * np.pi) ** 2
    rates = growth_rates(make_basis(3))
    assert rates[1] == pytest.approx(-lam + 1 / (1 + lam))
    assert np.all(rates < 0)
    assert growth_rates(make_basis(3), DriftKind.ZERO)[1] == pytest.approx(-lam)


def test_modal_coefficients_of_a_sine_series():
    basis = make_basis(4)
    coeffs = modal_coefficients(basis, SineSeries.of([(2, 1.0), (7, 3.0)]))
    assert np.allclose(coeffs, [0.0, 1 / np.sqrt(2), 0.0, 0.0])
    x = np.linspace(0, 1, 11)
    assert np.allclose(basis.evaluate(coeffs, x), np.sin(2 * np.pi * x))


def test_exact_solution_decays_from_initial_modes():
    basis = make_basis(4)
    v0 = modal_coefficients(basis, SineSeries.of([(2, 1.0)]))
    assert np.array_equal(exact_linear_deterministic(basis, v0, 0.0).coeffs, v0)
    later = exact_linear_deterministic(basis, v0, 0.05)
    assert later.l2_norm() < np.linalg.norm(v0)
    u = recover_modes(basis, later.coeffs)
    assert u[1] == pytest.approx(later.coeffs[1] / (1 + (2 * np.pi) ** 2))


def test_fractional_norm_of_order_zero_is_l2():
    basis = make_basis(5)
    coeffs = np.array([1.0, -2.0, 0.5, 0.0, 0.1])
    assert fractional_norm(basis, coeffs, 0.0) == pytest.approx(np.linalg.norm(coeffs))
    assert fractional_norm(basis, coeffs, 1.0) > fractional_norm(basis, coeffs, 0.0)


def test_ou_moments_vanish_at_time_zero():
    basis = make_basis(8)
    moments = ou_moments(basis, NoiseModel(s=1.0, J=8), 0.0)
    assert np.all(moments.variance == 0.0)


def test_discrete_ou_variance_converges_to_continuous():
    basis = make_basis(4)
    model = NoiseModel(s=2.0, J=4)
    exact = ou_moments(basis, model, 0.1).variance
    discrete = ou_moments(basis, model, 0.1, time_step=1e-6).variance
    assert np.allclose(discrete, exact, rtol=1e-3)


def test_semidiscrete_solution_is_close_to_exact():
    ops = assemble(Mesh1D(n_cells=64))
    v0 = l2_project(ops, SineSeries.of([(2, 1.0)]))
    t = 0.05
    v_h = discrete_semigroup(ops, v0.coeffs, t)
    rate = growth_rates(make_basis(2))[1]
    exact = np.exp(rate * t) * np.sin(2 * np.pi * ops.mesh.nodes())
    assert np.max(np.abs(v_h - exact)) <= 1e-2 * np.max(np.abs(exact))

import numpy as np
import pytest

from app.exceptions import ConfigError
from app.fem import FemFunction, Mesh1D, assemble
from app.flow import (
    SpatialStudy,
    StudyFactory,
    StudyPlan,
    TemporalStudy,
    fit_rate,
    mc_error,
    run_spatial_study,
    run_temporal_study,
    summarize_squared_errors,
)
from app.schema import DriftKind, StudyKind


def test_fit_rate_recovers_power_law():
    points = [(2.0**-n, 3.0 * 2.0 ** (-1.5 * n)) for n in range(3, 8)]
    fit = fit_rate(points)
    assert fit.slope == pytest.approx(1.5)
    assert fit.intercept == pytest.approx(np.log2(3.0))
    assert fit.residual < 1e-12


def test_fit_rate_needs_two_positive_points():
    with pytest.raises(ConfigError):
        fit_rate([(0.1, 0.2)])
    with pytest.raises(ConfigError):
        fit_rate([(0.1, 0.2), (0.05, 0.0)])


def test_strong_error_statistics():
    constant = summarize_squared_errors(np.full(10, 4.0))
    assert constant.error == 2.0
    assert constant.stderr == 0.0
    spread = summarize_squared_errors(np.array([1.0, 3.0]))
    assert spread.error == pytest.approx(np.sqrt(2.0))
    assert spread.stderr == pytest.approx(np.std([1.0, 3.0], ddof=1) / np.sqrt(2) / (2 * np.sqrt(2.0)))


def test_mc_error_uses_the_mass_norm(ops64):
    mesh = ops64.mesh
    ones = FemFunction(mesh=mesh, coeffs=np.ones(mesh.interior_nodes))
    zero = FemFunction.zeros(mesh)
    result = mc_error([(ones, zero), (zero, zero)], ops64)
    expected_sq = ones.coeffs @ ops64.mass_matvec(ones.coeffs)
    assert result.error == pytest.approx(np.sqrt(expected_sq / 2))
    assert result.samples == 2


def test_factory_dispatches_on_kind(small_spatial_plan):
    assert isinstance(StudyFactory.create_study(small_spatial_plan), SpatialStudy)
    temporal = small_spatial_plan.model_copy(update={"kind": StudyKind.TEMPORAL})
    assert isinstance(StudyFactory.create_study(temporal), TemporalStudy)


@pytest.mark.parametrize(
    "update",
    [
        {"s": 0.5},
        {"resolutions": (8, 4)},
        {"resolutions": (4, 16)},
        {"resolutions": (6, 8)},
        {"resolutions": ()},
    ],
)
def test_invalid_plans_are_refused(small_spatial_plan, update):
    with pytest.raises(ConfigError):
        run_spatial_study(small_spatial_plan.model_copy(update=update))


def test_inadmissible_plan_reports_the_inequality(small_spatial_plan):
    with pytest.raises(ConfigError, match=">="):
        run_spatial_study(small_spatial_plan.model_copy(update={"s": 0.5}))


def test_runner_refuses_the_wrong_kind(small_spatial_plan):
    with pytest.raises(ConfigError):
        run_temporal_study(small_spatial_plan)


def _deterministic_spatial_plan(**update):
    plan = StudyPlan(
        kind=StudyKind.SPATIAL,
        resolutions=(8, 16, 32, 64, 128),
        reference=1024,
        fixed_step=0.01,
        T=0.1,
        noise_enabled=False,
        drift=DriftKind.ZERO,
        samples=1,
        batch_size=1,
    )
    return plan.model_copy(update=update)


def test_noise_free_spatial_study_is_second_order():
    report = run_spatial_study(_deterministic_spatial_plan())
    assert 1.8 <= report.slope <= 2.2
    assert report.expected_rate == 1.0
    errors = [row.strong_error for row in report.rows]
    assert all(later < earlier for earlier, later in zip(errors, errors[1:]))


def test_single_sample_noise_free_study_is_deterministic():
    first = run_spatial_study(_deterministic_spatial_plan(resolutions=(8, 16), reference=64))
    second = run_spatial_study(_deterministic_spatial_plan(resolutions=(8, 16), reference=64))
    assert first.model_dump() == second.model_dump()


def test_noise_free_temporal_study_is_first_order():
    plan = StudyPlan(
        kind=StudyKind.TEMPORAL,
        resolutions=(64, 128, 256),
        reference=16384,
        fixed_cells=32,
        T=0.1,
        noise_enabled=False,
        samples=1,
        batch_size=1,
    )
    report = run_temporal_study(plan)
    assert 0.9 <= report.slope <= 1.1
    assert [row.h_or_k for row in report.rows] == [0.1 / 64, 0.1 / 128, 0.1 / 256]


def test_results_do_not_depend_on_worker_count(small_spatial_plan):
    serial = run_spatial_study(small_spatial_plan)
    parallel = run_spatial_study(small_spatial_plan.model_copy(update={"workers": 2}))
    assert serial.model_dump() == parallel.model_dump()


def test_decoupled_paths_destroy_the_strong_error(small_spatial_plan):
    coupled = run_spatial_study(small_spatial_plan)
    decoupled = run_spatial_study(small_spatial_plan.model_copy(update={"coupled": False}))
    assert decoupled.rows[-1].strong_error > 5 * coupled.rows[-1].strong_error


def test_error_history_ends_at_the_final_error():
    plan = StudyPlan(
        kind=StudyKind.TEMPORAL,
        resolutions=(8, 16, 32),
        reference=64,
        fixed_cells=8,
        T=0.5,
        s=1.0,
        samples=4,
        batch_size=2,
        error_history=True,
    )
    report = run_temporal_study(plan)
    assert report.expected_rate == pytest.approx((1.0 - 0.05) / 2)
    for row in report.rows:
        assert len(row.history) == 8
        assert row.history[-1] == pytest.approx(row.strong_error, rel=1e-12)


@pytest.mark.slow
def test_spatial_rate_of_the_reference_configuration():
    plan = StudyPlan(
        kind=StudyKind.SPATIAL,
        resolutions=(8, 16, 32, 64, 128),
        reference=1024,
        fixed_step=0.01,
        beta=1.0,
        s=0.5005,
        samples=1000,
        seed=20240611,
        workers=4,
    )
    report = run_spatial_study(plan)
    assert 0.75 <= report.slope <= 1.25


@pytest.mark.slow
@pytest.mark.parametrize(
    "reference, resolutions, samples, band",
    [
        (4096, (64, 128, 256, 512, 1024, 2048), 20, (0.10, 0.45)),
        (65536, (64, 128, 256, 512, 1024, 2048, 4096), 100, (0.13, 0.38)),
    ],
)
def test_temporal_rate_of_the_reference_configuration(reference, resolutions, samples, band):
    plan = StudyPlan(
        kind=StudyKind.TEMPORAL,
        resolutions=resolutions,
        reference=reference,
        fixed_cells=64,
        beta=0.5,
        s=0.0005,
        samples=samples,
        seed=20240611,
        workers=4,
    )
    report = run_temporal_study(plan)
    assert band[0] <= report.slope <= band[1]


@pytest.mark.slow
def test_doubling_samples_keeps_the_slope_in_its_band():
    plan = StudyPlan(
        kind=StudyKind.SPATIAL,
        resolutions=(8, 16, 32, 64),
        reference=256,
        fixed_step=0.01,
        samples=100,
        seed=7,
    )
    small = run_spatial_study(plan)
    large = run_spatial_study(plan.model_copy(update={"samples": 200}))
    assert abs(large.slope - small.slope) <= 0.25


def test_fit_rate_exact_orders_and_perturbation():
    hs = [2.0**-n for n in (3, 4, 5)]
    assert fit_rate([(h, 5 * h) for h in hs]).slope == pytest.approx(1.0, abs=1e-12)
    assert fit_rate([(h, 5 * h**2) for h in hs]).slope == pytest.approx(2.0, abs=1e-12)
    perturbed = [(hs[0], 5 * hs[0] * 1.1), (hs[1], 5 * hs[1]), (hs[2], 5 * hs[2])]
    assert abs(fit_rate(perturbed).slope - 1.0) <= 0.15


def test_mc_error_of_identical_states_is_zero(ops64):
    state = FemFunction(mesh=ops64.mesh, coeffs=np.linspace(0, 1, ops64.size))
    assert mc_error([(state, state)], ops64).error == 0.0
    with pytest.raises(ConfigError):
        mc_error([], ops64)

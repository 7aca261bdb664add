import numpy as np
import pytest

from app.exceptions import ConfigError
from app.fem import Mesh1D, assemble
from app.noise import (
    BrownianTable,
    NoiseModel,
    hat_projection,
    noise_load_vector,
    sample_increment,
    wiener_norm_check,
)


def test_covariance_eigenvalues_are_positive_and_non_increasing():
    model = NoiseModel(s=0.5005, J=32)
    assert np.all(model.gamma > 0)
    assert np.all(np.diff(model.gamma) <= 0)
    assert model.trace == pytest.approx(model.gamma.sum())


def test_tables_regenerate_bit_for_bit():
    first = BrownianTable(seed=5, sample_index=2, J=4, n_fine=600, T=1.0)
    second = BrownianTable(seed=5, sample_index=2, J=4, n_fine=600, T=1.0)
    assert np.array_equal(first.fine_increments(0, 600), second.fine_increments(0, 600))
    # a window straddling blocks reads the same values
    assert np.array_equal(first.fine_increments(250, 300), second.fine_increments(0, 600)[250:300])
    other = BrownianTable(seed=5, sample_index=3, J=4, n_fine=600, T=1.0)
    assert not np.array_equal(first.fine_increments(0, 10), other.fine_increments(0, 10))


def test_coarse_increment_is_sum_of_fine_increments():
    table = BrownianTable(seed=1, sample_index=0, J=6, n_fine=8, T=1.0)
    model = NoiseModel(s=1.0, J=6)
    fine = table.fine_increments(0, 2)
    increment = sample_increment(table, model, 1, 2 * table.k_fine)
    assert np.array_equal(increment, np.sqrt(model.gamma) * (fine[0] + fine[1]))


def test_step_must_align_with_the_fine_grid():
    table = BrownianTable(seed=1, sample_index=0, J=2, n_fine=8, T=1.0)
    model = NoiseModel(s=1.0, J=2)
    with pytest.raises(ConfigError):
        sample_increment(table, model, 1, 1.5 * table.k_fine)
    with pytest.raises(ConfigError):
        sample_increment(table, model, 5, 2 * table.k_fine)


def test_disabled_noise_gives_zero_increments():
    table = BrownianTable(seed=1, sample_index=0, J=3, n_fine=4, T=1.0)
    increment = sample_increment(table, NoiseModel(s=1.0, J=3, enabled=False), 2, 0.25)
    assert np.array_equal(increment, np.zeros(3))


def test_increment_variance_matches_covariance():
    model = NoiseModel(s=0.5005, J=1)
    k = 0.01
    draws = np.array(
        [
            sample_increment(BrownianTable(seed=9, sample_index=i, J=1, n_fine=1, T=k), model, 1, k)[0]
            for i in range(10_000)
        ]
    )
    ratio = draws.var() / (model.gamma[0] * k)
    assert 0.94 <= ratio <= 1.06


def test_load_vector_shapes_and_zero_increment(ops64):
    model = NoiseModel(s=1.0, J=10)
    assert np.array_equal(noise_load_vector(ops64, model, np.zeros(10)), np.zeros(ops64.size))
    batched = noise_load_vector(ops64, model, np.ones((10, 3)))
    assert batched.shape == (ops64.size, 3)
    assert np.array_equal(batched[:, 0], batched[:, 2])
    with pytest.raises(ConfigError):
        noise_load_vector(ops64, model, np.zeros(9))


def test_projection_matrix_is_shared_and_read_only(ops64):
    projection = hat_projection(ops64, 8)
    assert projection is hat_projection(assemble(Mesh1D(n_cells=64)), 8)
    with pytest.raises(ValueError):
        projection[0, 0] = 1.0


def test_wiener_norm_at_time_zero_is_zero():
    statistic = wiener_norm_check(NoiseModel(s=1.0, J=4), 0.0, 10)
    assert statistic.mean == 0.0
    assert statistic.expected == 0.0


def test_wiener_norm_matches_trace():
    statistic = wiener_norm_check(NoiseModel(s=4.0, J=16), 1.0, 10_000, seed=2)
    assert 0.95 <= statistic.ratio <= 1.05


def test_single_mode_is_scalar_brownian_motion():
    model = NoiseModel(s=1.0, J=1)
    statistic = wiener_norm_check(model, 2.0, 100)
    assert statistic.expected == pytest.approx(model.gamma[0] * 2.0)

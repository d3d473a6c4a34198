import math

import numpy as np
import pytest

from phi43_lattice.errors import InvalidParameterException
from phi43_lattice.experiments.harness import (THREADS_ENV, block_difference, block_variances, coupled_stationary, coupling_band, map_ordered,
                                               mc_block_variance, probe_points, rate_fit, resolve_threads)
from phi43_lattice.model.study_config import BlockObject, StudyKind
from phi43_lattice.model.symbol import Variant


def test_rate_fit_recovers_power_law():
    fit = rate_fit([(x, 3.0 * x ** 2) for x in (1.0, 2.0, 4.0, 8.0)])
    assert fit.slope == pytest.approx(2.0)
    assert fit.intercept == pytest.approx(math.log(3.0))
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.stderr == pytest.approx(0.0, abs=1e-12)
    assert fit.points == 4

def test_rate_fit_of_a_constant():
    assert rate_fit([(1.0, 5.0), (10.0, 5.0), (100.0, 5.0)]).slope == pytest.approx(0.0, abs=1e-12)

@pytest.mark.parametrize('points', [
    [(1.0, 1.0)],
    [(1.0, 1.0), (2.0, -1.0)],
    [(0.0, 1.0), (2.0, 1.0)],
    [(2.0, 1.0), (2.0, 3.0)]
])
def test_rate_fit_rejects_degenerate_input(points):
    with pytest.raises(InvalidParameterException):
        rate_fit(points)

def test_confidence_interval_width():
    fit = rate_fit([(1.0, 1.0), (2.0, 4.2), (4.0, 15.0), (8.0, 70.0)])
    lower, upper = fit.confidence_interval()
    assert lower < fit.slope < upper
    assert rate_fit([(1.0, 1.0), (2.0, 4.0)]).confidence_interval() == (-math.inf, math.inf)

def test_map_ordered_keeps_task_order(monkeypatch):
    monkeypatch.delenv(THREADS_ENV, raising=False)
    tasks = list(range(12))
    assert map_ordered(math.factorial, tasks, threads=1) == [math.factorial(n) for n in tasks]
    assert map_ordered(math.factorial, tasks, threads=3) == [math.factorial(n) for n in tasks]

def test_threads_environment_overrides_config(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, '3')
    assert resolve_threads(1) == 3
    monkeypatch.setenv(THREADS_ENV, '')
    assert resolve_threads(2) == 2

@pytest.mark.parametrize('value', ['many', '0'])
def test_threads_environment_must_be_positive_integer(monkeypatch, value):
    monkeypatch.setenv(THREADS_ENV, value)
    with pytest.raises(InvalidParameterException):
        resolve_threads(1)

def test_coupling_band(small_config):
    config = small_config(StudyKind.BLOCK_VARIANCE, N_list=[1, 3], N_ref=2)
    assert coupling_band(config) == 3
    assert coupling_band(config, 5) == 5

def test_probe_points_start_at_origin(small_config):
    config = small_config(StudyKind.BLOCK_VARIANCE, probe_points=5)
    points = probe_points(config)
    assert points.shape == (5, 3)
    np.testing.assert_array_equal(points[0], 0.0)
    assert np.all(np.abs(points) <= 1.0)
    np.testing.assert_array_equal(points, probe_points(config))

def test_identical_symbols_couple_exactly(small_config):
    config = small_config(StudyKind.BLOCK_VARIANCE, N_list=[2], N_ref=2, reference_variant=Variant.LATTICE)
    state, ref_state = coupled_stationary(2, config, 0)
    np.testing.assert_array_equal(state.coeffs, ref_state.coeffs)

def test_coupled_stationary_marginals(small_config):
    config = small_config(StudyKind.BLOCK_VARIANCE, N_list=[1], N_ref=2)
    replicas = [coupled_stationary(1, config, replica) for replica in range(300)]
    lattice = np.array([state.coefficient((1, 0, 0)) for state, _ in replicas])
    reference = np.array([ref.coefficient((1, 0, 0)) for _, ref in replicas])
    lam, lam_ref = 27.0 / 4.0, math.pi ** 2
    assert np.mean(np.abs(lattice) ** 2) == pytest.approx(0.5 / lam, rel=0.25)
    assert np.mean(np.abs(reference) ** 2) == pytest.approx(0.5 / lam_ref, rel=0.25)
    assert np.mean((lattice * np.conj(reference)).real) == pytest.approx(1.0 / (lam + lam_ref), rel=0.25)

@pytest.mark.parametrize('block_object', [BlockObject.U1_DIFF, BlockObject.WICK2_DIFF])
def test_identical_reference_has_zero_difference(small_config, block_object):
    config = small_config(StudyKind.BLOCK_VARIANCE, N_list=[2], N_ref=2, reference_variant=Variant.LATTICE)
    assert block_difference(block_object, 2, config, 1, 0.01).max_abs() == 0.0
    estimate = mc_block_variance(block_object, 1, 0.01, config)
    assert estimate.estimate == 0.0
    assert estimate.stderr == 0.0
    assert estimate.samples == config.samples

def test_u2_difference_vanishes_for_identical_reference(small_config):
    config = small_config(StudyKind.BLOCK_VARIANCE, N_list=[1], N_ref=1, reference_variant=Variant.LATTICE, T=0.004, dt=0.001, t_probe=0.004)
    assert block_difference(BlockObject.U2_DIFF, 1, config, 0, 0.004).max_abs() == 0.0

def test_block_variances_are_deterministic(small_config):
    config = small_config(StudyKind.BLOCK_VARIANCE, N_list=[1], N_ref=2, samples=3)
    first = block_variances(BlockObject.U1_DIFF, [0, 1, 2], 0.01, config)
    second = block_variances(BlockObject.U1_DIFF, [0, 1, 2], 0.01, config)
    assert [e.estimate for e in first] == [e.estimate for e in second]
    assert [e.q for e in first] == [0, 1, 2]
    assert all(e.estimate >= 0.0 and math.isfinite(e.stderr) for e in first)
    assert any(e.estimate > 0.0 for e in first)

def test_block_variance_single_sample_has_infinite_stderr(small_config):
    config = small_config(StudyKind.BLOCK_VARIANCE, N_list=[1], N_ref=2, samples=1)
    assert mc_block_variance(BlockObject.U1_DIFF, 1, 0.01, config).stderr == math.inf

@pytest.mark.parametrize('q, t', [(-2, 0.01), (40, 0.01), (0, 0.0), (0, 0.5)])
def test_block_variance_rejects_out_of_range(small_config, q, t):
    config = small_config(StudyKind.BLOCK_VARIANCE, N_list=[1], N_ref=2)
    with pytest.raises(InvalidParameterException):
        mc_block_variance(BlockObject.U1_DIFF, q, t, config)

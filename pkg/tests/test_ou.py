import math

import numpy as np
import pytest

from phi43_lattice.errors import InvalidParameterException
from phi43_lattice.lattice_spectral import dft_inverse, make_grid
from phi43_lattice.model.symbol import SymbolParams, Variant
from phi43_lattice.operators import stationary_variance
from phi43_lattice.stochastic.ou import ou_path, ou_sample_stationary, ou_transition, wick_power
from phi43_lattice.stochastic.renormalisation import compute_C0


def _lattice_lambda(k, N):
    eps = 2.0 / (2 * N + 1)
    return 4.0 / eps ** 2 * sum(math.sin(0.5 * math.pi * eps * c) ** 2 for c in k)


def test_stationary_sample_is_deterministic_and_real():
    first = ou_sample_stationary(make_grid(2), Variant.LATTICE, 4, 1)
    second = ou_sample_stationary(make_grid(2), Variant.LATTICE, 4, 1)
    np.testing.assert_array_equal(first.coeffs, second.coeffs)
    assert first.to_spectral().is_hermitian()
    assert first.t == 0.0 and first.position == 0

def test_coupled_resolutions_share_standard_normals():
    coarse = ou_sample_stationary(make_grid(1), Variant.LATTICE, 4, 0, coupling_band=3)
    fine = ou_sample_stationary(make_grid(3), Variant.LATTICE, 4, 0, coupling_band=3)
    v_coarse = stationary_variance(SymbolParams(1), 1)[2, 1, 1]
    v_fine = stationary_variance(SymbolParams(3), 3)[4, 3, 3]
    assert coarse.coefficient((1, 0, 0)) / np.sqrt(v_coarse) == pytest.approx(fine.coefficient((1, 0, 0)) / np.sqrt(v_fine))

def test_coupling_band_must_cover_the_grid():
    with pytest.raises(InvalidParameterException):
        ou_sample_stationary(make_grid(3), Variant.LATTICE, 0, coupling_band=2)

def test_stationary_variance_of_the_first_mode():
    samples = np.array([ou_sample_stationary(make_grid(1), Variant.LATTICE, 0, replica).coeffs for replica in range(400)])
    faces = [(2, 1, 1), (1, 2, 1), (1, 1, 2)]
    second_moment = np.mean([np.abs(samples[:, a, b, c]) ** 2 for a, b, c in faces])
    assert second_moment == pytest.approx(1.0 / 13.5, rel=0.2)

def test_transition_advances_time_and_stream():
    state = ou_sample_stationary(make_grid(2), Variant.GALERKIN, 1, continuum_factor=np.pi ** 2)
    later = ou_transition(state, 0.01)
    assert later.t == pytest.approx(0.01)
    assert later.position == 1
    assert later.params.variant == Variant.GALERKIN

def test_long_transition_forgets_the_start():
    state = ou_sample_stationary(make_grid(1), Variant.LATTICE, 1)
    decayed = ou_transition(state, 50.0)
    refreshed = np.sqrt(stationary_variance(state.params, 1)) * np.asarray(state.stream.draw(0, 1).coeffs)
    np.testing.assert_allclose(decayed.coeffs, refreshed, atol=1e-12)

@pytest.mark.parametrize('h', [0.0, -0.1])
def test_transition_rejects_nonpositive_step(h):
    with pytest.raises(InvalidParameterException):
        ou_transition(ou_sample_stationary(make_grid(1), Variant.LATTICE, 0), h)

def test_path_length():
    path = ou_path(ou_sample_stationary(make_grid(1), Variant.LATTICE, 0), 5, 0.1)
    assert len(path) == 6
    assert [state.position for state in path] == list(range(6))
    assert path[-1].t == pytest.approx(0.5)

def test_wick_powers():
    state = ou_sample_stationary(make_grid(2), Variant.LATTICE, 3)
    u1 = dft_inverse(state.to_spectral(), state.grid)
    values = np.asarray(u1.values)
    np.testing.assert_allclose(wick_power(u1, 2, 0.3).values, values ** 2 - 0.3)
    np.testing.assert_allclose(wick_power(u1, 3, 0.3).values, values ** 3 - 0.9 * values)
    with pytest.raises(InvalidParameterException):
        wick_power(u1, 4, 0.3)

def _within_three_stderr(samples, expected):
    samples = np.asarray(samples, dtype=float)
    stderr = samples.std(ddof=1) / np.sqrt(samples.size)
    assert abs(samples.mean() - expected) <= 3.0 * stderr

@pytest.mark.parametrize('k', [(1, 0, 0), (1, 1, 0), (1, -1, 1), (2, 0, 1)])
def test_lag_covariance_decays_with_the_eigenvalue(k):
    lag, grid = 0.02, make_grid(2)
    products = []
    for replica in range(500):
        start = ou_sample_stationary(grid, Variant.LATTICE, 8, replica)
        later = ou_transition(start, lag)
        products.append((later.coefficient(k) * np.conj(start.coefficient(k))).real)
    lam = _lattice_lambda(k, 2)
    _within_three_stderr(products, math.exp(-lam * lag) / (2.0 * lam))

def test_pointwise_second_moment_is_C0():
    grid = make_grid(2)
    site_means = []
    for replica in range(500):
        state = ou_sample_stationary(grid, Variant.LATTICE, 9, replica)
        site_means.append(np.mean(np.asarray(dft_inverse(state.to_spectral(), grid).values) ** 2))
    _within_three_stderr(site_means, compute_C0(2))

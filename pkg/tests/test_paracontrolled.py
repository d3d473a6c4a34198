import math

import numpy as np
import pytest

from phi43_lattice.errors import InvalidParameterException
from phi43_lattice.experiments.harness import rate_fit
from phi43_lattice.model.analysis import BesovIndex
from phi43_lattice.model.field import SpectralField
from phi43_lattice.paracontrolled import (DyadicPartition, ParaproductKind, besov_norm, build_dyadic_partition, chi, commutator,
                                          holder_norm, lp_block, lp_norm, multiply, paraproduct, partial_sum, theta)
from phi43_lattice.stochastic.noise import NoiseStream
from phi43_lattice import utils


def test_profiles():
    np.testing.assert_allclose(chi(np.array([0.0, 0.3, 0.5])), 1.0)
    np.testing.assert_allclose(chi(np.array([1.0, 3.0])), 0.0)
    np.testing.assert_allclose(theta(np.array([0.2, 2.0, 5.0])), 0.0)
    assert theta(np.array([1.0]))[0] == pytest.approx(1.0)

def test_partition_rejects_nonpositive_band():
    with pytest.raises(InvalidParameterException):
        DyadicPartition(0)

def test_profile_rejects_low_index():
    with pytest.raises(InvalidParameterException):
        DyadicPartition.profile(-2, np.array([1.0]))

@pytest.mark.parametrize('band', [1, 3, 6])
def test_blocks_sum_to_identity(band, random_field):
    part = build_dyadic_partition(band)
    u = random_field(band)
    total = sum((lp_block(u, j, part) for j in part.blocks(band)), SpectralField.zeros(band))
    np.testing.assert_allclose(total.coeffs, u.coeffs, atol=1e-12)

def test_partial_sums_telescope(random_field):
    part = build_dyadic_partition(4)
    u = random_field(4)
    for j in range(0, 5):
        blocks = sum((lp_block(u, i, part) for i in range(-1, j)), SpectralField.zeros(4))
        np.testing.assert_allclose(partial_sum(u, j, part).coeffs, blocks.coeffs, atol=1e-12)

@pytest.mark.parametrize('bands', [(2, 2), (1, 3), (3, 2)])
def test_paraproducts_sum_to_product(bands, random_field):
    f, g = random_field(bands[0]), random_field(bands[1])
    part = build_dyadic_partition(max(bands))
    total = sum((paraproduct(f, g, kind, part) for kind in ParaproductKind), SpectralField.zeros(sum(bands)))
    np.testing.assert_allclose(total.coeffs, multiply(f, g).coeffs, atol=1e-10)

def test_greater_paraproduct_is_reflected_lesser(random_field):
    f, g = random_field(2), random_field(2)
    part = build_dyadic_partition(2)
    np.testing.assert_allclose(paraproduct(f, g, ParaproductKind.GT, part).coeffs,
                               paraproduct(g, f, ParaproductKind.LT, part).coeffs, atol=0)

def test_paraproduct_accepts_kind_values(random_field):
    f, g = random_field(1), random_field(1)
    part = build_dyadic_partition(1)
    np.testing.assert_array_equal(paraproduct(f, g, 'res', part).coeffs, paraproduct(f, g, ParaproductKind.RES, part).coeffs)

def test_lp_norms_of_a_cosine():
    u = SpectralField.single_mode(2, (1, 0, 0), 4.0)
    assert lp_norm(u) == pytest.approx(1.0)
    assert lp_norm(u, 2.0) == pytest.approx(2.0)

def test_lp_norm_rejects_small_oversample(random_field):
    with pytest.raises(InvalidParameterException):
        lp_norm(random_field(1), oversample=1)

def test_holder_norm_grows_with_regularity():
    u = SpectralField.single_mode(3, (2, 1, 0), 2.0)
    part = build_dyadic_partition(3)
    norms = [holder_norm(u, alpha, part) for alpha in (-0.6, 0.0, 0.5)]
    assert norms[0] < norms[1] < norms[2]
    assert holder_norm(SpectralField.zeros(3), -0.6, part) == 0.0

def test_finite_besov_sum_dominates_sup(random_field):
    u = random_field(3)
    part = build_dyadic_partition(3)
    assert besov_norm(u, BesovIndex(-0.5, math.inf, 1.0), part) >= besov_norm(u, BesovIndex(-0.5), part)

def test_besov_index_range():
    with pytest.raises(InvalidParameterException):
        BesovIndex(0.0, p=0.5)

def test_commutator_is_linear_in_each_argument(random_field):
    f, g, h = random_field(1), random_field(1), random_field(1)
    part = build_dyadic_partition(1)
    base = commutator(f, g, h, part)
    np.testing.assert_allclose(commutator(f * 2.0, g, h, part).coeffs, 2.0 * base.coeffs, atol=1e-10)
    np.testing.assert_allclose(commutator(f, g, h * -3.0, part).coeffs, -3.0 * base.coeffs, atol=1e-10)

def test_paraproducts_sum_to_product_at_band_8(random_field):
    f, g = random_field(8), random_field(8)
    part = build_dyadic_partition(8)
    total = sum((paraproduct(f, g, kind, part) for kind in ParaproductKind), SpectralField.zeros(16))
    bound = 1e-10 * lp_norm(f) * lp_norm(g)
    assert lp_norm(total - multiply(f, g)) <= bound


def _truncated_field(band: int, decay: float, seed: int) -> SpectralField:
    """Band-B truncation of one fixed random field with coefficients ~ |k|^-decay; bands share their modes."""
    xi = NoiseStream(seed, 0, 32).draw(0, band)
    return SpectralField(np.asarray(xi.coeffs) * (1.0 + utils.frequency_square_norm(band)) ** (-0.5 * decay))

def _paraproduct_ratios(band: int):
    f, g = _truncated_field(band, 2.7, 11), _truncated_field(band, 1.7, 12)
    part = build_dyadic_partition(band)
    g_norm = holder_norm(g, -0.4, part)
    lesser = holder_norm(paraproduct(f, g, ParaproductKind.LT, part), -0.4, part) / (lp_norm(f) * g_norm)
    resonant = holder_norm(paraproduct(f, g, ParaproductKind.RES, part), 0.2, part) / (holder_norm(f, 0.6, part) * g_norm)
    return lesser, resonant

def _assert_stable(ratios):
    for previous, current in zip(ratios, ratios[1:]):
        assert 0.0 < current <= 1.25 * previous

@pytest.mark.parametrize('bands', [
    (4, 8),
    pytest.param((8, 16, 32), marks=pytest.mark.slow),
])
def test_paraproduct_constants_are_stable_in_band(bands):
    ratios = [_paraproduct_ratios(band) for band in bands]
    _assert_stable([lesser for lesser, _ in ratios])
    _assert_stable([resonant for _, resonant in ratios])

def _commutator_ratio(band: int, seed: int) -> float:
    f = _truncated_field(band, 2.7, 3 * seed)
    g = _truncated_field(band, 1.7, 3 * seed + 1)
    h = _truncated_field(band, 2.0, 3 * seed + 2)
    part = build_dyadic_partition(band)
    value = holder_norm(commutator(f, g, h, part), 0.1, part)
    return value / (holder_norm(f, 0.6, part) * holder_norm(g, -0.4, part) * holder_norm(h, -0.1, part))

@pytest.mark.parametrize('triples', [3, pytest.param(50, marks=pytest.mark.slow)])
def test_commutator_constant_is_stable_in_band(triples):
    for seed in range(1, triples + 1):
        _assert_stable([_commutator_ratio(band, seed) for band in (4, 8)])

@pytest.mark.parametrize('alpha,beta', [(-0.5, 0.5), (0.5, -0.5)])
def test_bernstein_exponent_of_a_single_frequency(alpha, beta):
    points = []
    for N in (2, 4, 8, 16):
        u = SpectralField.single_mode(N, (N, 0, 0), 2.0)
        part = build_dyadic_partition(N)
        points.append((N, holder_norm(u, beta, part) / holder_norm(u, alpha, part)))
    assert rate_fit(points).slope == pytest.approx(beta - alpha, abs=0.1)

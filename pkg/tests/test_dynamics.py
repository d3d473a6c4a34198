import math

import numpy as np
import pytest

from phi43_lattice.dynamics import (decompose_remainder, initial_datum, run_coupled, run_coupled_sweep, run_lattice_path, step_galerkin_phi,
                                    step_lattice_phi, step_phi)
from phi43_lattice.errors import InvalidParameterException
from phi43_lattice.experiments.harness import rate_fit
from phi43_lattice.model.field import SpectralField
from phi43_lattice.model.sim_state import RunConfig, SimState, SimStatus
from phi43_lattice.model.symbol import Cutoff, SymbolParams, Variant
from phi43_lattice.operators import apply_semigroup, eigenvalues
from phi43_lattice.paracontrolled import build_dyadic_partition
from phi43_lattice.stochastic.noise import NoiseStream


def _state(params, phi, consts, L=1e6):
    return SimState(params, phi, 0.0, consts, L)


def test_initial_datum_is_real_and_deterministic():
    phi0 = initial_datum(3)
    assert phi0.band == 2
    assert phi0.is_hermitian()
    assert phi0.coeff((0, 0, 0)) == 0
    np.testing.assert_array_equal(phi0.coeffs, initial_datum(3).coeffs)

def test_zero_state_without_noise_stays_zero(flat_constants):
    state = _state(SymbolParams(2), SpectralField.zeros(2), flat_constants(2))
    for _ in range(5):
        state = step_lattice_phi(state, 0.01, SpectralField.zeros(2))
    assert state.phi.max_abs() == 0.0
    assert state.step == 5
    assert state.t == pytest.approx(0.05)

def test_linear_step_is_the_semigroup(flat_constants, random_field):
    phi = random_field(2)
    state = _state(SymbolParams(2), phi, flat_constants(2))
    stepped = step_lattice_phi(state, 0.01, SpectralField.zeros(2), cubic=False, renormalise=False)
    np.testing.assert_allclose(stepped.phi.coeffs, apply_semigroup(phi, 0.01, SymbolParams(2)).coeffs, atol=1e-14)

def test_cube_pulls_towards_zero(flat_constants):
    phi = SpectralField.single_mode(1, (1, 0, 0), 40.0)
    state = _state(SymbolParams(1), phi, flat_constants(1))
    linear = step_lattice_phi(state, 0.001, SpectralField.zeros(1), cubic=False, renormalise=False)
    cubic = step_lattice_phi(state, 0.001, SpectralField.zeros(1), cubic=True, renormalise=False)
    assert cubic.phi.coeff((1, 0, 0)).real < linear.phi.coeff((1, 0, 0)).real

def test_galerkin_step_keeps_noise_below_N_ref(flat_constants):
    params = SymbolParams(1, Variant.GALERKIN, Cutoff.SHARP, math.pi ** 2)
    state = _state(params, SpectralField.zeros(3), flat_constants(1))
    xi = NoiseStream(0, 0, 3).draw(0)
    stepped = step_galerkin_phi(state, 0.01, xi, cubic=False, renormalise=False)
    assert stepped.phi.band == 3
    assert stepped.phi.coeff((2, 0, 0)) == 0
    assert stepped.phi.coeff((1, 0, 0)) != 0

def test_step_dispatches_on_variant(flat_constants, random_field):
    phi = random_field(1)
    lattice = _state(SymbolParams(1), phi, flat_constants(1))
    galerkin = _state(SymbolParams(1, Variant.GALERKIN, continuum_factor=1.0), phi, flat_constants(1))
    xi = SpectralField.zeros(1)
    np.testing.assert_array_equal(step_phi(lattice, 0.01, xi).phi.coeffs, step_lattice_phi(lattice, 0.01, xi).phi.coeffs)
    np.testing.assert_array_equal(step_phi(galerkin, 0.01, xi).phi.coeffs, step_galerkin_phi(galerkin, 0.01, xi).phi.coeffs)

def test_step_rejects_nonpositive_h(flat_constants):
    with pytest.raises(InvalidParameterException):
        step_lattice_phi(_state(SymbolParams(1), SpectralField.zeros(1), flat_constants(1)), 0.0, SpectralField.zeros(1))

def test_identical_lattice_reference_gives_zero_error():
    config = RunConfig(2, 2, T=0.01, dt=0.001, record_every=3, reference_variant=Variant.LATTICE)
    run = run_coupled(config, seed=4)
    assert run.status == SimStatus.DONE
    assert run.stop_time == pytest.approx(0.01)
    assert all(e == 0.0 for _, e in run.error_curve)
    # t = 0, three full checks and the final step
    assert [round(t, 6) for t, _ in run.error_curve] == [0.0, 0.003, 0.006, 0.009, 0.01]

def test_lattice_reference_must_resolve_every_N():
    config = RunConfig(2, 1, T=0.01, dt=0.001, reference_variant=Variant.LATTICE)
    with pytest.raises(InvalidParameterException):
        run_coupled(config, seed=0)

def test_sweep_is_deterministic_and_ordered():
    config = RunConfig(1, 2, T=0.004, dt=0.001, record_every=2)
    first = run_coupled_sweep(config, [1, 2], seed=9, replica=1)
    second = run_coupled_sweep(config, [1, 2], seed=9, replica=1)
    assert [run.N for run in first] == [1, 2]
    for a, b in zip(first, second):
        assert a.error_curve == b.error_curve
        assert a.replica == 1 and a.N_ref == 2

def test_sweep_matches_single_runs():
    config = RunConfig(1, 2, T=0.004, dt=0.001, record_every=2)
    sweep = run_coupled_sweep(config, [1, 2], seed=9)
    single = run_coupled(config, seed=9)
    # noise is drawn on max(N_list, N_ref) = 2 either way
    assert sweep[0].error_curve == single.error_curve

def test_low_threshold_stops_at_first_check():
    config = RunConfig(1, 1, T=0.01, dt=0.001, L=1e-9, reference_variant=Variant.LATTICE)
    run = run_coupled(config, seed=1)
    assert run.blown_up
    assert run.stop_time == 0.0
    assert len(run.error_curve) == 1

def test_horizon_is_capped_by_L():
    assert RunConfig(1, 2, T=5.0, L=0.5).horizon == 0.5

def test_sweep_rejects_empty_list():
    with pytest.raises(InvalidParameterException):
        run_coupled_sweep(RunConfig(1, 2), [], seed=0)

def test_linear_path_differs_from_u1_by_the_semigroup(flat_constants):
    config = RunConfig(2, 2, T=0.005, dt=0.001, cubic=False, renormalise=False)
    states, ou_states = run_lattice_path(config, seed=2, consts=flat_constants(2))
    assert len(states) == len(ou_states) == 6
    start = states[0].phi - ou_states[0].to_spectral()
    end = states[-1].phi - ou_states[-1].to_spectral()
    np.testing.assert_allclose(end.coeffs, apply_semigroup(start, 0.005, SymbolParams(2)).coeffs, atol=1e-12)

def test_remainder_decomposition(flat_constants):
    config = RunConfig(1, 1, T=0.003, dt=0.001, cubic=False, renormalise=False)
    states, ou_states = run_lattice_path(config, seed=2, consts=flat_constants(1))
    zeros = [SpectralField.zeros(1)] * len(states)
    part = build_dyadic_partition(1)
    remainder = decompose_remainder(states, ou_states, zeros, 0.04, part)
    assert len(remainder) == 4
    np.testing.assert_allclose(remainder.fields[-1].coeffs, (states[-1].phi - ou_states[-1].to_spectral()).coeffs)
    assert all(norm >= 0 for norm in remainder.norms)

def test_remainder_rejects_mismatched_paths(flat_constants):
    config = RunConfig(1, 1, T=0.002, dt=0.001)
    states, ou_states = run_lattice_path(config, seed=2, consts=flat_constants(1))
    part = build_dyadic_partition(1)
    with pytest.raises(InvalidParameterException):
        decompose_remainder(states, ou_states[:-1], [SpectralField.zeros(1)] * len(states), 0.04, part)
    with pytest.raises(InvalidParameterException):
        decompose_remainder(states[1:], ou_states[:-1], [SpectralField.zeros(1)] * (len(states) - 1), 0.04, part)

def test_eigenvalue_decay_of_the_linear_step(flat_constants):
    phi = SpectralField.single_mode(1, (1, 1, 0), 1.0)
    state = _state(SymbolParams(1), phi, flat_constants(1))
    stepped = step_lattice_phi(state, 0.02, SpectralField.zeros(1), cubic=False, renormalise=False)
    lam = eigenvalues(SymbolParams(1), 1)[2, 2, 1]
    assert stepped.phi.coeff((1, 1, 0)) == pytest.approx(math.exp(-0.02 * lam))

def test_blowup_between_records_stops_at_the_crossing_step():
    base = dict(T=0.05, dt=0.001, reference_variant=Variant.LATTICE)
    path = run_coupled(RunConfig(1, 1, L=1e6, record_every=1, **base), seed=2)
    norms = [record.norm_minus_z for record in path.lattice]
    k = next(k for k in range(1, len(norms)) if k % 10 and norms[k] > max(norms[:k]))
    level = 0.5 * (max(norms[:k]) + norms[k])
    run = run_coupled(RunConfig(1, 1, L=level, record_every=10, **base), seed=2)
    assert run.blown_up
    assert run.stop_time == pytest.approx(k * 0.001)
    assert run.lattice[-1].status == SimStatus.BLOWN_UP
    assert run.lattice[-1].norm_minus_z == pytest.approx(norms[k])

def test_sup_error_covers_unrecorded_steps():
    dense = run_coupled(RunConfig(1, 2, T=0.01, dt=0.001, record_every=1), seed=3)
    sparse = run_coupled(RunConfig(1, 2, T=0.01, dt=0.001, record_every=7), seed=3)
    assert [round(t, 6) for t, _ in sparse.error_curve] == [0.0, 0.007, 0.01]
    assert sparse.sup_error == dense.sup_error

def _coarse_increments(fine: list, lam: np.ndarray, fine_h: float, m: int) -> list:
    """Standard normals of m-step blocks carrying the exact OU convolution of the fine increments."""
    with np.errstate(divide='ignore', invalid='ignore'):
        scale = np.where(lam > 0, np.sqrt(np.expm1(-2.0 * lam * fine_h) / np.expm1(-2.0 * lam * m * fine_h)), 0.0)
    blocks = []
    for start in range(0, len(fine), m):
        acc = sum(np.exp(-lam * (m - 1 - j) * fine_h) * fine[start + j] for j in range(m))
        blocks.append(SpectralField(scale * acc))
    return blocks

@pytest.mark.parametrize('variant,factor', [(Variant.LATTICE, 1.0), (Variant.GALERKIN, math.pi ** 2)])
def test_exponential_euler_converges_at_first_order_on_a_fixed_path(variant, factor, flat_constants):
    params = SymbolParams(2, variant, Cutoff.SHARP, factor)
    lam = eigenvalues(params, 2)
    finest, T = 128, 0.032
    fine_h = T / finest
    stream = NoiseStream(5, 0, 2)
    fine = [0.1 * np.asarray(stream.draw(n).coeffs) for n in range(finest)]
    phi0 = initial_datum(5) * 4.0

    def solve(m):
        state = _state(params, phi0, flat_constants(2))
        for xi in _coarse_increments(fine, lam, fine_h, m):
            state = step_phi(state, m * fine_h, xi, renormalise=False)
        return np.asarray(state.phi.coeffs)

    reference = solve(1)
    points = [(m * fine_h, float(np.max(np.abs(solve(m) - reference)))) for m in (16, 8, 4, 2)]
    assert rate_fit(points).slope >= 0.9

"""Driver objects built from u1: Wick square and cube, u2, K and the renormalised resonant product."""
import logging
import math
from typing import List

import numpy as np

from ..errors import InvalidParameterException
from ..lattice_spectral import analyze, dft_forward, dft_inverse, hermitian_project, synthesize
from ..model.field import SpectralField
from ..model.ou_state import OUState
from ..model.renorm import Correctors, RenormConstants
from ..model.symbol import SymbolParams, Variant
from ..operators import eigenvalues
from ..paracontrolled import DyadicPartition, ParaproductKind, multiply, paraproduct
from .ou import wick_power


logger = logging.getLogger(__name__)


def _with_mean_shift(spec: SpectralField, constant: float) -> SpectralField:
    """Add a spatial constant: Y^(0) carries 8 times the mean."""
    coeffs = np.array(spec.coeffs)
    band = spec.band
    coeffs[band, band, band] += 8.0 * constant
    return SpectralField(coeffs)

def wick_square(state: OUState, C0: float) -> SpectralField:
    """(u1)^{<>2} = u1^2 - C0 as a torus function, exact product of band 2N (mean kept)."""
    u1 = state.to_spectral()
    return _with_mean_shift(multiply(u1, u1), -C0)

def wick_cube_forcing(state: OUState, C0: float) -> SpectralField:
    """Band-N projection of (u1)^{<>3}: Q_N of the cube for the lattice, P_N for the galerkin variant.

    The lattice cube is taken pointwise on Lambda_eps, which aliases it exactly into Q_N;
    the galerkin cube is sampled on a 4N+1 grid, where no alias reaches the retained band.
    """
    N = state.grid.N
    u1 = state.to_spectral()
    if state.variant == Variant.LATTICE:
        return dft_forward(wick_power(dft_inverse(u1, state.grid), 3, C0))
    points = 4 * N + 1
    values = synthesize(u1, points).real
    return hermitian_project(SpectralField(analyze(values ** 3 - 3.0 * C0 * values, N)))

def _check_step(dt: float, path_length: int, steps: int) -> None:
    if dt <= 0:
        raise InvalidParameterException("Time step must be positive", {'dt': dt})
    if path_length < steps + 1:
        raise InvalidParameterException("Path does not cover the integration window", {'pathLength': path_length, 'steps': steps})

def compute_u2(ou_path: List[OUState], T: float, dt: float, C0: float) -> List[SpectralField]:
    """u2(t) = -int_0^t P_{t-s} Q_N[(u1)^{<>3}] ds by exponential Duhamel quadrature.

    u2(t_{m+1}) = e^{-lambda dt} u2(t_m) - dt e^{-lambda dt/2} F(t_m), F the band-N Wick cube
    (lattice: Q_N, galerkin: P_N on a dealiased grid).

    Args:
        ou_path (List[OUState]): u1 at t_m = t_0 + m dt.
        T (float): Horizon.
        dt (float): Step.
        C0 (float): Wick constant of the path's variant (C0 or C0_bar).

    Raises:
        InvalidParameterException: If dt <= 0, the path has gaps or does not reach T.

    Returns:
        List[SpectralField]: u2 at t_0, ..., t_0 + T (band N).
    """
    steps = int(round(T / dt)) if dt > 0 else 0
    _check_step(dt, len(ou_path), steps)
    start = ou_path[0].t
    for m, state in enumerate(ou_path[:steps + 1]):
        if abs(state.t - start - m * dt) > 1e-9 * max(1.0, T):
            raise InvalidParameterException("Path sampling does not match dt", {'index': m, 't': state.t, 'expected': start + m * dt})
    params = ou_path[0].params
    lam = eigenvalues(params, params.N)
    decay, half_decay = np.exp(-dt * lam), np.exp(-0.5 * dt * lam)
    current = np.zeros((2 * params.N + 1,) * 3, dtype=complex)
    path = [SpectralField(current)]
    for m in range(steps):
        forcing = np.asarray(wick_cube_forcing(ou_path[m], C0).coeffs)
        current = decay * current - dt * half_decay * forcing
        path.append(SpectralField(current))
    return path

def compute_K(wick2_path: List[SpectralField], t: float, dt: float, params: SymbolParams) -> SpectralField:
    """K(t) = int_0^t P_{t-s} (u1)^{<>2} ds with the sharp band-N semigroup, same Duhamel quadrature.

    Args:
        wick2_path (List[SpectralField]): Wick square at 0, dt, 2dt, ...
        t (float): Evaluation time, t >= 0.
        dt (float): Step.
        params (SymbolParams): Symbol of P_t (lattice or galerkin).

    Raises:
        InvalidParameterException: If dt <= 0, t < 0 or the path is too short.

    Returns:
        SpectralField: K(t), band N, mean kept.
    """
    if t < 0:
        raise InvalidParameterException("K needs t >= 0", {'t': t})
    steps = int(round(t / dt)) if dt > 0 else 0
    _check_step(dt, len(wick2_path), steps)
    N = params.N
    lam = eigenvalues(params, N)
    decay, half_decay = np.exp(-dt * lam), np.exp(-0.5 * dt * lam)
    current = np.zeros((2 * N + 1,) * 3, dtype=complex)
    for m in range(steps):
        current = decay * current + dt * half_decay * np.asarray(wick2_path[m].with_band(N).coeffs)
    return SpectralField(current)

def resonant_renormalized(K: SpectralField, wick2: SpectralField, t: float, N: int,
                          consts: RenormConstants, corr: Correctors, part: DyadicPartition,
                          variant: Variant = Variant.LATTICE) -> SpectralField:
    """pi_{0,<>}(K, (u1)^{<>2}) = pi_0(K, (u1)^{<>2}) - C11 - phi1(t).

    Args:
        K (SpectralField): K(t).
        wick2 (SpectralField): Wick square at t.
        t (float): Time, positive.
        N (int): Lattice cut.
        consts (RenormConstants): Constants of N.
        corr (Correctors): Correctors evaluated at t.
        part (DyadicPartition): Partition.
        variant (Variant, optional): Galerkin subtracts C11_bar + phi1_bar. Defaults to Variant.LATTICE.

    Raises:
        InvalidParameterException: If t <= 0 or the correctors belong to another time.

    Returns:
        SpectralField: The renormalised resonant product.
    """
    if t <= 0:
        raise InvalidParameterException("Resonant product needs t > 0", {'t': t})
    if not math.isclose(corr.t, t, rel_tol=1e-9):
        raise InvalidParameterException("Correctors were evaluated at another time", {'t': t, 'correctorTime': corr.t})
    if variant == Variant.LATTICE:
        counterterm = consts.C11 + corr.phi1
    else:
        counterterm = consts.C11_bar + corr.phi1_bar
    return _with_mean_shift(paraproduct(K, wick2, ParaproductKind.RES, part), -counterterm)

def field_mean(spec: SpectralField) -> float:
    """Spatial mean of a spectral field (Y^(0) / 8)."""
    band = spec.band
    return float(spec.coeffs[band, band, band].real / 8.0)

def evaluate_at(spec: SpectralField, points: np.ndarray) -> np.ndarray:
    """Y(x) = 1/8 sum Y^(k) e^{i pi k.x} at arbitrary points (shape (P, 3)), real part."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    band = spec.band
    axis = np.arange(-band, band + 1)
    phases = [np.exp(1j * np.pi * np.outer(points[:, d], axis)) for d in range(3)]
    values = np.einsum('abc,pa,pb,pc->p', np.asarray(spec.coeffs), phases[0], phases[1], phases[2]) / 8.0
    return values.real

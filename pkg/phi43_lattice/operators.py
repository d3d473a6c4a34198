"""Fourier multipliers of the lattice and continuum Laplacians: semigroups, P_N, Pi_N, modulations, mode covariances."""
from functools import lru_cache
import logging
from typing import Sequence, Tuple

import numpy as np
from scipy import optimize

from .errors import InvalidParameterException, UnsupportedBandException
from .lattice_spectral import fold_to_band, project_mean
from .model.field import LatticeField, SpectralField
from .model.symbol import Cutoff, SymbolParams, Variant
from . import utils


logger = logging.getLogger(__name__)

SMOOTH_CUTOFF_INNER = float(np.sqrt(3.0))
SMOOTH_CUTOFF_OUTER = 1.8


def symbol_f(x: Sequence[float]) -> float:
    """f(x) = 4/|x|^2 (sin^2(x1 pi/2) + sin^2(x2 pi/2) + sin^2(x3 pi/2)).

    Args:
        x (Sequence[float]): Nonzero real 3-vector.

    Raises:
        InvalidParameterException: If x = 0.

    Returns:
        float: f(x), tends to pi^2 as x -> 0.
    """
    x = np.asarray(x, dtype=float)
    norm2 = float(np.dot(x, x))
    if norm2 == 0.0:
        raise InvalidParameterException("symbol_f is undefined at x = 0", {'x': x.tolist()})
    return 4.0 / norm2 * float(np.sum(np.sin(0.5 * np.pi * x) ** 2))

def _symbol_f_array(points: np.ndarray) -> np.ndarray:
    norm2 = np.sum(points ** 2, axis=-1)
    return 4.0 / norm2 * np.sum(np.sin(0.5 * np.pi * points) ** 2, axis=-1)

def symbol_bounds(radius: float = SMOOTH_CUTOFF_OUTER, points: int = 41) -> Tuple[float, float]:
    """c_f = min f and c_f_bar = max f on {0 < |x| <= radius}: dense grid search plus local refinement.

    Returns:
        Tuple[float, float]: (c_f, c_f_bar).
    """
    axis = np.linspace(-radius, radius, points)
    cube = np.stack(np.meshgrid(axis, axis, axis, indexing='ij'), axis=-1).reshape(-1, 3)
    norm2 = np.sum(cube ** 2, axis=-1)
    ball = cube[(norm2 <= radius ** 2) & (norm2 > 0)]
    values = _symbol_f_array(ball)
    c_f, c_f_bar = float(values.min()), float(values.max())
    constraint = {'type': 'ineq', 'fun': lambda x: radius ** 2 - float(np.dot(x, x))}
    for sign, start in ((1.0, ball[np.argmin(values)]), (-1.0, ball[np.argmax(values)])):
        result = optimize.minimize(lambda x: sign * symbol_f(x), start, method='SLSQP', constraints=[constraint], options={'ftol': 1e-12})
        if not result.success or float(np.dot(result.x, result.x)) > radius ** 2 + 1e-12:
            continue
        if sign > 0:
            c_f = min(c_f, float(result.fun))
        else:
            c_f_bar = max(c_f_bar, -float(result.fun))
    logger.debug(f"symbol bounds on |x| <= {radius}: c_f={c_f:.8f}, c_f_bar={c_f_bar:.8f}")
    return c_f, c_f_bar

def smooth_cutoff(x_norm: np.ndarray) -> np.ndarray:
    """phi as a function of |x|: 1 on |x| <= sqrt(3) (hence on |x|_inf <= 1), 0 on |x| >= 1.8."""
    return 1.0 - utils.smoothstep((np.asarray(x_norm) - SMOOTH_CUTOFF_INNER) / (SMOOTH_CUTOFF_OUTER - SMOOTH_CUTOFF_INNER))

@lru_cache(maxsize=64)
def _eigenvalue_table(N: int, band: int, variant: Variant, continuum_factor: float) -> np.ndarray:
    k1, k2, k3 = utils.frequency_grid(band)
    if variant == Variant.LATTICE:
        eps = 2.0 / (2 * N + 1)
        table = 4.0 / eps ** 2 * (np.sin(0.5 * np.pi * eps * k1) ** 2 + np.sin(0.5 * np.pi * eps * k2) ** 2 + np.sin(0.5 * np.pi * eps * k3) ** 2)
    else:
        table = continuum_factor * utils.frequency_square_norm(band)
    table = np.broadcast_to(table, (2 * band + 1,) * 3).copy()
    table.setflags(write=False)
    return table

def eigenvalues(params: SymbolParams, band: int) -> np.ndarray:
    """lambda_k on the centered cube: |k|^2 f(eps k) (lattice) or c|k|^2 (galerkin); lambda_0 = 0.

    Args:
        params (SymbolParams): Symbol parameters.
        band (int): Cube band.

    Returns:
        np.ndarray: Read-only eigenvalue table.
    """
    return _eigenvalue_table(params.N, band, params.variant, float(params.continuum_factor))

def cutoff_multiplier(params: SymbolParams, band: int) -> np.ndarray:
    if params.cutoff == Cutoff.SHARP:
        return (utils.frequency_sup_norm(band) <= params.N).astype(float)
    if params.cutoff == Cutoff.SMOOTH:
        eps = 2.0 / (2 * params.N + 1)
        return smooth_cutoff(eps * np.sqrt(utils.frequency_square_norm(band)))
    return np.ones((2 * band + 1,) * 3)

def apply_laplacian_stencil(field: LatticeField) -> LatticeField:
    """Delta_eps f(x) = eps^{-2} sum_{y ~ x} (f(y) - f(x)), periodic 6-point stencil.

    Args:
        field (LatticeField): Values on Lambda_eps.

    Returns:
        LatticeField: Stencil result.
    """
    values = np.asarray(field.values)
    eps = 2.0 / field.side
    result = -6.0 * values
    for axis in range(3):
        result = result + np.roll(values, 1, axis=axis) + np.roll(values, -1, axis=axis)
    return LatticeField(result / eps ** 2, field.grid)

def apply_semigroup(spec: SpectralField, t: float, params: SymbolParams) -> SpectralField:
    """Multiply coeff(k) by e^{-t lambda_k} times the selected cutoff (P_t^eps, smoothed P_t^eps or heat flow P_t).

    Args:
        spec (SpectralField): Input field.
        t (float): Time, t >= 0.
        params (SymbolParams): Symbol and cutoff.

    Raises:
        InvalidParameterException: If t < 0.

    Returns:
        SpectralField: Output field, same band.
    """
    if t < 0:
        raise InvalidParameterException("Semigroup time must be nonnegative", {'t': t})
    multiplier = np.exp(-t * eigenvalues(params, spec.band)) * cutoff_multiplier(params, spec.band)
    return SpectralField(spec.coeffs * multiplier)

def project_PN(spec: SpectralField, N: int) -> SpectralField:
    """P_N: zero all coefficients with |k|_inf > N (output band min(band, N)), mean projected; idempotent."""
    return project_mean(np.array(spec.with_band(min(spec.band, N)).coeffs))

def modulate(spec: SpectralField, triple: utils.Triple, N: int) -> SpectralField:
    """Multiply by e_N^{i1i2i3}(x) = prod_j e^{-i pi (2N+1) i_j x^j}: shifts every k by -(2N+1)(i1,i2,i3).

    Args:
        spec (SpectralField): Input field.
        triple (utils.Triple): (i1,i2,i3) in {-1,0,1}^3, not all zero.
        N (int): Lattice cut.

    Raises:
        InvalidParameterException: If triple = (0,0,0) or has entries outside {-1,0,1}.

    Returns:
        SpectralField: Modulated field with band + 2N+1.
    """
    if tuple(triple) == (0, 0, 0) or any(i not in (-1, 0, 1) for i in triple):
        raise InvalidParameterException("Modulation triple must be a nonzero element of {-1,0,1}^3", {'triple': list(triple)})
    shift = 2 * N + 1
    band = spec.band
    new_band = band + shift
    out = np.zeros((2 * new_band + 1,) * 3, dtype=complex)
    start = [new_band - band - shift * i for i in triple]
    size = 2 * band + 1
    out[start[0]:start[0] + size, start[1]:start[1] + size, start[2]:start[2] + size] = spec.coeffs
    return SpectralField(out)

def _block_mask(band: int, triple: utils.Triple, N: int) -> np.ndarray:
    masks = []
    for axis_index, i in enumerate(triple):
        k = utils.frequency_grid(band)[axis_index]
        if i == 0:
            masks.append(np.abs(k) <= N)
        elif i == 1:
            masks.append(k > N)
        else:
            masks.append(k < -N)
    return masks[0] & masks[1] & masks[2]

def project_PiN(spec: SpectralField, N: int) -> SpectralField:
    """Pi_N u = sum over the 26 triples of P_N[e_N^{i1i2i3} (u restricted to the block P^{i1i2i3})].

    Args:
        spec (SpectralField): Input with band <= 3N.
        N (int): Lattice cut.

    Raises:
        UnsupportedBandException: If band > 3N.

    Returns:
        SpectralField: Band N field; P_N + Pi_N = fold_to_band.
    """
    if spec.band > 3 * N:
        raise UnsupportedBandException("project_PiN supports band <= 3N", {'band': spec.band, 'N': N})
    total = np.zeros((2 * N + 1,) * 3, dtype=complex)
    if spec.band <= N:
        return SpectralField(total)
    for triple in utils.nonzero_triples():
        mask = _block_mask(spec.band, triple, N)
        if not mask.any():
            continue
        block = SpectralField(np.where(mask, spec.coeffs, 0.0))
        total += np.asarray(modulate(block, triple, N).with_band(N).coeffs)
    return SpectralField(total)

def project_QN(spec: SpectralField, N: int) -> SpectralField:
    """Q_N = P_N + Pi_N, computed as the fold."""
    return fold_to_band(spec, N)

def covariance_V(k: utils.Triple, t: float, N: int, variant: Variant, continuum_factor: float = 1.0) -> float:
    """Mode covariance V_t(k) = e^{-lambda_k |t|} 1_{|k|_inf <= N} / (2 lambda_k) of the stochastic convolution.

    Args:
        k (utils.Triple): Nonzero frequency.
        t (float): Time lag.
        N (int): Lattice cut.
        variant (Variant): Lattice or galerkin symbol.
        continuum_factor (float, optional): c in the galerkin symbol c|k|^2. Defaults to 1.0.

    Raises:
        InvalidParameterException: If k = 0.

    Returns:
        float: V_t(k).
    """
    if tuple(k) == (0, 0, 0):
        raise InvalidParameterException("Covariance is undefined at k = 0", {'k': list(k)})
    if max(abs(int(c)) for c in k) > N:
        return 0.0
    if variant == Variant.LATTICE:
        eps = 2.0 / (2 * N + 1)
        lam = float(np.dot(k, k)) * symbol_f(eps * np.asarray(k, dtype=float))
    else:
        lam = continuum_factor * float(np.dot(k, k))
    return float(np.exp(-lam * abs(t)) / (2.0 * lam))

def stationary_variance(params: SymbolParams, band: int) -> np.ndarray:
    """V_0(k) on the centered cube with the sharp indicator |k|_inf <= N; 0 at k = 0."""
    lam = eigenvalues(params, band)
    inside = (utils.frequency_sup_norm(band) <= params.N) & (lam > 0)
    with np.errstate(divide='ignore'):
        return np.where(inside, 0.5 / np.where(lam > 0, lam, 1.0), 0.0)

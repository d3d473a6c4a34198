"""Discrete Fourier analysis on the lattice Lambda_eps and the lattice <-> torus dictionary.

Conventions: the torus is [-1,1]^3, a spectral field stores Y^(k) such that
Y(x) = 1/8 sum_k Y^(k) e^{i pi k.x}, and the forward transform is
Y^(k) = sum_x eps^3 Y(x) e^{-i pi k.x}. The orthonormal basis e_k = 2^{-3/2} e^{i pi k.x}
only enters where noise is attached to modes (see `stochastic.noise`).
"""
import logging
from typing import Optional, Union

import numpy as np
import scipy.fft

from .errors import InvalidDataException, InvalidParameterException, SymmetryViolationException, UnsupportedBandException
from .model.field import LatticeField, SpectralField
from .model.grid import GridSpec


logger = logging.getLogger(__name__)


def make_grid(N: int) -> GridSpec:
    """Build the lattice of resolution N, eps = 2/(2N+1).

    Args:
        N (int): Lattice cut, at least 1.

    Raises:
        InvalidParameterException: If N < 1.

    Returns:
        GridSpec: The grid.
    """
    if not isinstance(N, (int, np.integer)) or N < 1:
        raise InvalidParameterException("Lattice cut N must be a positive integer", {'N': repr(N)})
    return GridSpec(int(N))

def _to_fft_layout(coeffs: np.ndarray, points: int) -> np.ndarray:
    band = (coeffs.shape[0] - 1) // 2
    if 2 * band + 1 > points:
        raise InvalidParameterException("Sample grid too small for band", {'band': band, 'points': points})
    out = np.zeros((points,) * 3, dtype=complex)
    index = np.arange(-band, band + 1) % points
    out[np.ix_(index, index, index)] = coeffs
    return out

def _fold_axis(array: np.ndarray, axis: int, modulus: int, band: int) -> np.ndarray:
    """Fold frequencies of one axis onto {-band..band} modulo `modulus` (modulus = 2*band+1), summing collisions."""
    array = np.moveaxis(array, axis, 0)
    old_band = (array.shape[0] - 1) // 2
    target = (np.arange(-old_band, old_band + 1) + band) % modulus
    out = np.zeros((modulus,) + array.shape[1:], dtype=array.dtype)
    np.add.at(out, target, array)
    return np.moveaxis(out, 0, axis)

def synthesize(spec: SpectralField, points: int, workers: Optional[int] = None) -> np.ndarray:
    """Evaluate 1/8 sum_k Y^(k) e^{i pi k.x} on the uniform `points`^3 torus grid (complex values, centered layout).

    Args:
        spec (SpectralField): Coefficients.
        points (int): Points per axis, at least 2*band+1.
        workers (Optional[int]): scipy.fft worker count.

    Returns:
        np.ndarray: Complex grid values.
    """
    standard = _to_fft_layout(np.asarray(spec.coeffs), points)
    values = scipy.fft.ifftn(standard, workers=workers) * (points ** 3 / 8.0)
    return scipy.fft.fftshift(values)

def analyze(values: np.ndarray, band: int, workers: Optional[int] = None) -> np.ndarray:
    """Coefficients (2/M)^3 sum_x Y(x) e^{-i pi k.x} of grid values for |k|_inf <= band.

    Frequencies beyond the grid's Nyquist range wrap around (aliasing is the caller's choice).

    Args:
        values (np.ndarray): Grid values in centered layout, M points per axis.
        band (int): Output band.
        workers (Optional[int]): scipy.fft worker count.

    Returns:
        np.ndarray: Centered coefficient cube.
    """
    points = values.shape[0]
    transformed = scipy.fft.fftn(scipy.fft.ifftshift(values), workers=workers) * (2.0 / points) ** 3
    index = np.arange(-band, band + 1) % points
    return transformed[np.ix_(index, index, index)]

def project_mean(coeffs: np.ndarray) -> SpectralField:
    band = (coeffs.shape[0] - 1) // 2
    mean = coeffs[band, band, band].real / 8.0
    coeffs[band, band, band] = 0.0
    return SpectralField(coeffs, discarded_mean=float(mean))

def dft_forward(field: Union[LatticeField, np.ndarray]) -> SpectralField:
    """Discrete Fourier transform on Lambda_eps, projected onto the mean-zero flow.

    Args:
        field (Union[LatticeField, np.ndarray]): Real values on the 2N+1 lattice.

    Raises:
        InvalidDataException: If values are not finite or not an odd-sided cube.

    Returns:
        SpectralField: Band N coefficients, `discarded_mean` holds the removed spatial mean.
    """
    if not isinstance(field, LatticeField):
        field = LatticeField(np.asarray(field))
    if field.side % 2 == 0:
        raise InvalidDataException("Lattice fields have an odd number of points per axis", {'side': field.side})
    N = (field.side - 1) // 2
    spec = project_mean(analyze(np.asarray(field.values), N))
    if spec.discarded_mean != 0.0:
        logger.debug(f"dft_forward discarded mean {spec.discarded_mean:.3e} (N={N})")
    return spec

def dft_inverse(spec: SpectralField, grid: Optional[GridSpec] = None) -> LatticeField:
    """Inverse transform Y(x) = 1/8 sum_k Y^(k) e^{i pi k.x} at the lattice sites.

    Args:
        spec (SpectralField): Hermitian coefficients with band <= N.
        grid (Optional[GridSpec]): Target lattice, defaults to the lattice of the field's band.

    Raises:
        SymmetryViolationException: If the coefficients are not Hermitian.
        InvalidParameterException: If the band exceeds the lattice cut.

    Returns:
        LatticeField: Real lattice values.
    """
    if grid is None:
        grid = GridSpec(spec.band)
    if spec.band > grid.N:
        raise InvalidParameterException("Band exceeds lattice cut", {'band': spec.band, 'N': grid.N})
    if not spec.is_hermitian():
        raise SymmetryViolationException("Inverse transform needs a Hermitian spectrum", {'residual': spec.hermitian_residual()})
    return LatticeField(synthesize(spec, grid.side).real, grid)

def ext_sample(spec: SpectralField, M: int) -> LatticeField:
    """Evaluate the trigonometric extension Ext Y on the uniform M^3 torus grid.

    Args:
        spec (SpectralField): Hermitian coefficients.
        M (int): Points per axis, at least 2*band+1 so nothing aliases.

    Raises:
        InvalidParameterException: If M is too small.
        SymmetryViolationException: If the coefficients are not Hermitian.

    Returns:
        LatticeField: Samples of Ext Y.
    """
    if M < 2 * spec.band + 1:
        raise InvalidParameterException("Oversample grid would alias", {'M': M, 'band': spec.band})
    if not spec.is_hermitian():
        raise SymmetryViolationException("Ext sampling needs a Hermitian spectrum", {'residual': spec.hermitian_residual()})
    return LatticeField(synthesize(spec, M).real)

def fold_to_band(spec: SpectralField, N: int) -> SpectralField:
    """Q_N on band-3N inputs: move every k with |k|_inf > N to k - (2N+1)(i1,i2,i3) inside the band.

    Args:
        spec (SpectralField): Input with band <= 3N.
        N (int): Lattice cut.

    Raises:
        UnsupportedBandException: If band > 3N.

    Returns:
        SpectralField: Band N field, the spectrum of Ext(u restricted to Lambda_eps), mean projected.
    """
    if spec.band > 3 * N:
        raise UnsupportedBandException("fold_to_band supports band <= 3N", {'band': spec.band, 'N': N})
    folded = np.asarray(spec.coeffs)
    for axis in range(3):
        folded = _fold_axis(folded, axis, 2 * N + 1, N)
    return project_mean(np.array(folded))

def hermitian_project(spec: SpectralField) -> SpectralField:
    """Average coeff(k) with conj(coeff(-k)) and zero the mean; idempotent.

    Args:
        spec (SpectralField): Any coefficients.

    Returns:
        SpectralField: Hermitian, mean-zero field.
    """
    averaged = 0.5 * (np.asarray(spec.coeffs) + spec.reflected_conjugate())
    return project_mean(averaged)

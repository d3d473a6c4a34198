from __future__ import annotations # Allow referencing enclosing class in typings
from typing import Any, Dict, Optional, Union

import numpy as np

from ..errors import InvalidDataException
from .. import utils
from .grid import GridSpec


class SpectralField:
    """Fourier coefficients Y^(k) of sum_k Y^(k) e^{i pi k.x} / 8 on the centered cube {-band..band}^3.

    Coefficients are stored on the full cube (no half-spectrum packing), row-major in k.
    A real field is Hermitian: coeff(-k) = conj(coeff(k)).
    """

    band: int

    coeffs: np.ndarray

    discarded_mean: float
    """The spatial mean removed when the field was projected to the mean-zero flow."""

    def __init__(self, coeffs: np.ndarray, discarded_mean: float = 0.0) -> None:
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.ndim != 3 or len(set(coeffs.shape)) != 1 or coeffs.shape[0] % 2 == 0:
            raise InvalidDataException("Spectral coefficients must be an odd-sided cube", {'shape': list(coeffs.shape)})
        if not np.all(np.isfinite(coeffs)):
            raise InvalidDataException("Spectral coefficients must be finite", {'shape': list(coeffs.shape)})
        coeffs.setflags(write=False)
        self.coeffs = coeffs
        self.band = (coeffs.shape[0] - 1) // 2
        self.discarded_mean = discarded_mean

    @classmethod
    def zeros(cls, band: int) -> SpectralField:
        return cls(np.zeros((2 * band + 1,) * 3, dtype=complex))

    @classmethod
    def single_mode(cls, band: int, k: utils.Triple, value: complex = 1.0, hermitian: bool = True) -> SpectralField:
        """A field with one coefficient at k (and its conjugate at -k when hermitian)."""
        coeffs = np.zeros((2 * band + 1,) * 3, dtype=complex)
        coeffs[k[0] + band, k[1] + band, k[2] + band] += value
        if hermitian:
            coeffs[band - k[0], band - k[1], band - k[2]] += np.conj(value)
        return cls(coeffs)

    def coeff(self, k: utils.Triple) -> complex:
        if max(abs(k[0]), abs(k[1]), abs(k[2])) > self.band:
            return 0j
        return complex(self.coeffs[k[0] + self.band, k[1] + self.band, k[2] + self.band])

    def reflected_conjugate(self) -> np.ndarray:
        """conj(coeff(-k)) arranged at k."""
        return np.conj(self.coeffs[::-1, ::-1, ::-1])

    def hermitian_residual(self) -> float:
        return float(np.max(np.abs(self.coeffs - self.reflected_conjugate()), initial=0.0))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.coeffs), initial=0.0)))
        return self.hermitian_residual() <= tol * scale

    def with_band(self, band: int) -> SpectralField:
        """Zero-pad to a larger band, or sharply truncate to a smaller one."""
        if band == self.band:
            return self
        return SpectralField(utils.embed_centered(np.asarray(self.coeffs), band), self.discarded_mean)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs), initial=0.0))

    def _aligned(self, other: SpectralField):
        band = max(self.band, other.band)
        return self.with_band(band).coeffs, other.with_band(band).coeffs

    def __add__(self, other: SpectralField) -> SpectralField:
        left, right = self._aligned(other)
        return SpectralField(left + right)

    def __sub__(self, other: SpectralField) -> SpectralField:
        left, right = self._aligned(other)
        return SpectralField(left - right)

    def __mul__(self, scalar: Union[float, complex]) -> SpectralField:
        return SpectralField(self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> SpectralField:
        return SpectralField(-self.coeffs)

    def __repr__(self) -> str:
        return f"SpectralField(band={self.band}, max|c|={self.max_abs():.3e})"


class LatticeField:
    """Real values on a uniform torus grid with `side` points per axis.

    Grid point with centered index j (j in {-floor(side/2)..ceil(side/2)-1}) sits at x = 2j/side.
    For side = 2N+1 these are exactly the lattice sites eps*m of Lambda_eps.
    """

    values: np.ndarray

    grid: Optional[GridSpec]

    def __init__(self, values: np.ndarray, grid: Optional[GridSpec] = None) -> None:
        values = np.asarray(values)
        if np.iscomplexobj(values):
            raise InvalidDataException("Lattice field values must be real", {'dtype': str(values.dtype)})
        values = values.astype(float)
        if values.ndim != 3 or len(set(values.shape)) != 1:
            raise InvalidDataException("Lattice field values must be a cube", {'shape': list(values.shape)})
        if not np.all(np.isfinite(values)):
            raise InvalidDataException("Lattice field values must be finite", {'shape': list(values.shape)})
        if grid is None and values.shape[0] % 2 == 1:
            grid = GridSpec((values.shape[0] - 1) // 2)
        values.setflags(write=False)
        self.values = values
        self.grid = grid

    @property
    def side(self) -> int:
        return self.values.shape[0]

    def mean(self) -> float:
        return float(np.mean(self.values))

    def __add__(self, other: LatticeField) -> LatticeField:
        return LatticeField(self.values + other.values, self.grid)

    def __sub__(self, other: LatticeField) -> LatticeField:
        return LatticeField(self.values - other.values, self.grid)

    def __repr__(self) -> str:
        return f"LatticeField(side={self.side})"

    def to_json_object(self) -> Dict[str, Any]:
        return {
            'side': self.side,
            'grid': self.grid.to_json_object() if self.grid is not None else None
        }

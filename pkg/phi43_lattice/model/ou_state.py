from __future__ import annotations # Allow referencing enclosing class in typings
from typing import Any, Dict

import numpy as np

from .field import SpectralField
from .grid import GridSpec
from .symbol import SymbolParams


BASIS_FACTOR = 2.0 ** 1.5
"""Spectral coefficient of a_k e_k: Y^(k) = 2^{3/2} a_k, since e_k = 2^{-3/2} e^{i pi k.x} and Y = 1/8 sum Y^(k) e^{i pi k.x}."""


class OUState:
    """Per-mode Ornstein-Uhlenbeck coefficients a_k of u1(x) = 2^{-3/2} sum_k a_k e^{i pi k.x}.

    The noise stream is counter based: `position` is the index of the next draw.
    """

    grid: GridSpec

    params: SymbolParams
    """Symbol of the linear part (lattice or galerkin) with the sharp cutoff |k|_inf <= N."""

    t: float

    coeffs: np.ndarray
    """Centered band-N cube of a_k, Hermitian, a_0 = 0. Read-only."""

    stream: Any
    """`stochastic.noise.NoiseStream` shared with every coupled integrator."""

    position: int

    def __init__(self, grid: GridSpec, params: SymbolParams, t: float, coeffs: np.ndarray, stream: Any, position: int) -> None:
        coeffs = np.asarray(coeffs, dtype=complex)
        coeffs.setflags(write=False)
        self.grid = grid
        self.params = params
        self.t = t
        self.coeffs = coeffs
        self.stream = stream
        self.position = position

    @property
    def variant(self):
        return self.params.variant

    def to_spectral(self) -> SpectralField:
        """u1 as a spectral field (band N)."""
        return SpectralField(BASIS_FACTOR * self.coeffs)

    def coefficient(self, k) -> complex:
        N = self.grid.N
        return complex(self.coeffs[k[0] + N, k[1] + N, k[2] + N])

    def __repr__(self) -> str:
        return f"OUState(N={self.grid.N}, variant={self.params.variant.value}, t={self.t:g}, position={self.position})"

    def to_json_object(self) -> Dict[str, Any]:
        return {
            'grid': self.grid.to_json_object(),
            'symbol': self.params.to_json_object(),
            't': self.t,
            'stream': self.stream.to_json_object(),
            'position': self.position
        }

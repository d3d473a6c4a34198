from __future__ import annotations # Allow referencing enclosing class in typings
from enum import Enum
from typing import Any, Dict, Optional


class Variant(Enum):
    LATTICE = 'lattice'
    """Symbol |k|^2 f(eps k) of the lattice Laplacian."""
    GALERKIN = 'galerkin'
    """Continuum symbol c|k|^2 (f identically c) of the spectral-Galerkin reference."""


class Cutoff(Enum):
    SHARP = 'sharp'
    """1_{|k|_inf <= N}, the projection P_N."""
    SMOOTH = 'smooth'
    """phi(eps k), equal to 1 on |x|_inf <= 1 and supported in |x| <= 1.8."""
    NONE = 'none'


class SymbolParams:
    """Parameters of a Fourier multiplier built from the Laplacian symbol."""

    N: int

    variant: Variant

    cutoff: Cutoff

    continuum_factor: float
    """c in the continuum symbol c|k|^2. 1 gives the bare continuum symbol |k|^2, pi^2 = f(0) matches the lattice symbol as eps k -> 0."""

    _c_f: Optional[float] = None

    _c_f_bar: Optional[float] = None

    def __init__(self, N: int, variant: Variant = Variant.LATTICE, cutoff: Cutoff = Cutoff.SHARP, continuum_factor: float = 1.0) -> None:
        self.N = N
        self.variant = variant
        self.cutoff = cutoff
        self.continuum_factor = continuum_factor
        self._c_f = None
        self._c_f_bar = None

    @property
    def c_f(self) -> float:
        """min of f on |x| <= 1.8, computed once."""
        if self._c_f is None:
            from ..operators import symbol_bounds
            self._c_f, self._c_f_bar = symbol_bounds()
        return self._c_f

    @property
    def c_f_bar(self) -> float:
        """max of f on |x| <= 1.8, computed once."""
        if self._c_f_bar is None:
            self.c_f
        return self._c_f_bar  # type: ignore

    def with_variant(self, variant: Variant) -> SymbolParams:
        return SymbolParams(self.N, variant, self.cutoff, self.continuum_factor)

    def key(self):
        return (self.N, self.variant, self.cutoff, self.continuum_factor)

    def __repr__(self) -> str:
        return f"SymbolParams(N={self.N}, variant={self.variant.value}, cutoff={self.cutoff.value}, c={self.continuum_factor:g})"

    @classmethod
    def from_json_object(cls, json_object: Dict[str, Any]) -> SymbolParams:
        return cls(
            json_object['N'],
            Variant(json_object.get('variant', Variant.LATTICE.value)),
            Cutoff(json_object.get('cutoff', Cutoff.SHARP.value)),
            json_object.get('continuumFactor', 1.0)
        )

    def to_json_object(self) -> Dict[str, Any]:
        return {
            'N': self.N,
            'variant': self.variant.value,
            'cutoff': self.cutoff.value,
            'continuumFactor': self.continuum_factor
        }

"""Littlewood-Paley analysis on the torus: dyadic partition, blocks, Besov norms, paraproducts, commutator.

Profiles are evaluated at the analytic frequency pi*k of e^{i pi k.x}, so block j collects
roughly the shell 2^{j-1} < pi|k| < 2^{j+1}.
"""
from enum import Enum
from functools import lru_cache
import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from .errors import InvalidParameterException
from .lattice_spectral import analyze, synthesize
from .model.analysis import BesovIndex
from .model.field import SpectralField
from . import utils


logger = logging.getLogger(__name__)


class ParaproductKind(Enum):
    LT = 'lt'
    """pi_<(f, g) = sum_j S_{j-1} f Delta_j g"""
    RES = 'res'
    """pi_0(f, g) = sum_{|i-j|<=1} Delta_i f Delta_j g"""
    GT = 'gt'
    """pi_>(f, g) = pi_<(g, f)"""


def chi(z_norm: np.ndarray) -> np.ndarray:
    """Radial low-frequency profile: 1 on |z| <= 1/2, 0 on |z| >= 1."""
    return 1.0 - utils.smoothstep(2.0 * np.abs(np.asarray(z_norm, dtype=float)) - 1.0)

def theta(z_norm: np.ndarray) -> np.ndarray:
    """Annulus profile chi(z/2) - chi(z), supported in 1/2 < |z| < 2."""
    z_norm = np.asarray(z_norm, dtype=float)
    return chi(0.5 * z_norm) - chi(z_norm)


class DyadicPartition:
    """Dyadic partition of unity (chi, theta) sized for fields of band up to 3N."""

    N: int

    jmax: int
    """Largest block index that can be active on a band-3N field."""

    def __init__(self, N: int) -> None:
        if N < 1:
            raise InvalidParameterException("Partition band target must be positive", {'N': N})
        self.N = N
        self.jmax = math.ceil(math.log2(math.sqrt(3.0) * math.pi * (3 * N + 1))) + 1

    @staticmethod
    def chi(z_norm: np.ndarray) -> np.ndarray:
        return chi(z_norm)

    @staticmethod
    def theta(z_norm: np.ndarray) -> np.ndarray:
        return theta(z_norm)

    @staticmethod
    def profile(j: int, z_norm: np.ndarray) -> np.ndarray:
        """chi for j = -1, theta(2^-j z) for j >= 0."""
        if j < -1:
            raise InvalidParameterException("Block index must be >= -1", {'j': j})
        if j == -1:
            return chi(z_norm)
        return theta(np.asarray(z_norm, dtype=float) / 2.0 ** j)

    @staticmethod
    def top_block(band: int) -> int:
        """Largest j whose block can be nonzero on a band-limited field."""
        if band <= 0:
            return -1
        return math.ceil(math.log2(math.sqrt(3.0) * math.pi * band)) + 1

    def blocks(self, band: Optional[int] = None) -> List[int]:
        top = self.jmax if band is None else self.top_block(band)
        return list(range(-1, top + 1))

    def __repr__(self) -> str:
        return f"DyadicPartition(N={self.N}, jmax={self.jmax})"


def build_dyadic_partition(N: int) -> DyadicPartition:
    """Build the partition used for band-3N fields of the resolution N.

    Args:
        N (int): Band target, at least 1.

    Returns:
        DyadicPartition: The partition.
    """
    part = DyadicPartition(N)
    logger.debug(f"built {part}")
    return part

@lru_cache(maxsize=32)
def _analytic_frequency(band: int) -> np.ndarray:
    table = np.pi * np.sqrt(utils.frequency_square_norm(band))
    table.setflags(write=False)
    return table

@lru_cache(maxsize=64)
def _block_multiplier(j: int, band: int) -> np.ndarray:
    table = DyadicPartition.profile(j, _analytic_frequency(band))
    table.setflags(write=False)
    return table

@lru_cache(maxsize=64)
def _partial_sum_multiplier(j: int, band: int) -> np.ndarray:
    # S_j = sum_{i <= j-1} Delta_i telescopes to chi(2^-j .)
    if j <= -1:
        table = np.zeros((2 * band + 1,) * 3)
    else:
        table = chi(_analytic_frequency(band) / 2.0 ** j)
    table.setflags(write=False)
    return table

def lp_block(u: SpectralField, j: int, part: DyadicPartition) -> SpectralField:
    """Littlewood-Paley block Delta_j u.

    Args:
        u (SpectralField): Input field.
        j (int): Block index, at least -1.
        part (DyadicPartition): Partition.

    Raises:
        InvalidParameterException: If j < -1.

    Returns:
        SpectralField: Delta_j u, same band.
    """
    if j < -1:
        raise InvalidParameterException("Block index must be >= -1", {'j': j})
    return SpectralField(np.asarray(u.coeffs) * _block_multiplier(j, u.band))

def partial_sum(u: SpectralField, j: int, part: DyadicPartition) -> SpectralField:
    """S_j u = sum_{i <= j-1} Delta_i u."""
    return SpectralField(np.asarray(u.coeffs) * _partial_sum_multiplier(j, u.band))

def lp_norm(u: SpectralField, p: float = math.inf, oversample: int = 2) -> float:
    """L^p([-1,1]^3) norm by quadrature on an oversample*(2*band+1) grid (grid max for p = inf).

    Raises:
        InvalidParameterException: If oversample < 2.
    """
    if oversample < 2:
        raise InvalidParameterException("Oversample factor must be at least 2", {'oversample': oversample})
    points = oversample * (2 * u.band + 1)
    values = np.abs(synthesize(u, points))
    if math.isinf(p):
        return float(values.max(initial=0.0))
    return float((8.0 / points ** 3 * np.sum(values ** p)) ** (1.0 / p))

def block_norms(u: SpectralField, p: float, part: DyadicPartition, oversample: int = 2) -> List[Tuple[int, float]]:
    """(j, ||Delta_j u||_{L^p}) for every block that can be active on u."""
    return [(j, lp_norm(lp_block(u, j, part), p, oversample)) for j in part.blocks(u.band)]

def besov_norm(u: SpectralField, idx: BesovIndex, part: DyadicPartition, oversample: int = 2) -> float:
    """B^alpha_{p,q} norm: l^q over j of 2^{j alpha} ||Delta_j u||_{L^p}.

    Args:
        u (SpectralField): Band-limited field.
        idx (BesovIndex): (alpha, p, q).
        part (DyadicPartition): Partition.
        oversample (int, optional): Quadrature grid factor, at least 2. Defaults to 2.

    Raises:
        InvalidParameterException: If oversample < 2.

    Returns:
        float: The norm.
    """
    if oversample < 2:
        raise InvalidParameterException("Oversample factor must be at least 2", {'oversample': oversample})
    weighted = np.array([2.0 ** (j * idx.alpha) * norm for j, norm in block_norms(u, idx.p, part, oversample)])
    if math.isinf(idx.q):
        return float(weighted.max(initial=0.0))
    return float(np.sum(weighted ** idx.q) ** (1.0 / idx.q))

def holder_norm(u: SpectralField, alpha: float, part: DyadicPartition, oversample: int = 2) -> float:
    """||u||_alpha = B^alpha_{inf,inf} norm."""
    return besov_norm(u, BesovIndex(alpha), part, oversample)

def _product_grid(f: SpectralField, g: SpectralField) -> Tuple[int, int]:
    band = f.band + g.band
    return band, 2 * band + 1

def multiply(f: SpectralField, g: SpectralField) -> SpectralField:
    """Exact product f*g (band = sum of bands), computed on a fully dealiased grid."""
    band, points = _product_grid(f, g)
    return SpectralField(analyze(synthesize(f, points) * synthesize(g, points), band))

def _paraproduct_lt(f: SpectralField, g: SpectralField, part: DyadicPartition) -> SpectralField:
    band, points = _product_grid(f, g)
    total = np.zeros((points,) * 3, dtype=complex)
    for j in part.blocks(max(f.band, g.band)):
        if j <= 0:
            continue  # S_{j-1} = 0
        total += synthesize(partial_sum(f, j - 1, part), points) * synthesize(lp_block(g, j, part), points)
    return SpectralField(analyze(total, band))

def _paraproduct_res(f: SpectralField, g: SpectralField, part: DyadicPartition) -> SpectralField:
    band, points = _product_grid(f, g)
    total = np.zeros((points,) * 3, dtype=complex)
    for j in part.blocks(max(f.band, g.band)):
        # Delta_{j-1} + Delta_j + Delta_{j+1} = S_{j+2} - S_{j-1}
        neighbours = SpectralField(np.asarray(f.coeffs) * (_partial_sum_multiplier(j + 2, f.band) - _partial_sum_multiplier(j - 1, f.band)))
        total += synthesize(neighbours, points) * synthesize(lp_block(g, j, part), points)
    return SpectralField(analyze(total, band))

def paraproduct(f: SpectralField, g: SpectralField, kind: ParaproductKind, part: DyadicPartition) -> SpectralField:
    """Bony paraproducts; pi_< + pi_0 + pi_> = f*g.

    Args:
        f (SpectralField): Left factor.
        g (SpectralField): Right factor.
        kind (ParaproductKind): lt, res or gt.
        part (DyadicPartition): Partition.

    Returns:
        SpectralField: Output with band f.band + g.band, computed without folding.
    """
    kind = ParaproductKind(kind)
    if kind == ParaproductKind.LT:
        return _paraproduct_lt(f, g, part)
    if kind == ParaproductKind.GT:
        return _paraproduct_lt(g, f, part)
    return _paraproduct_res(f, g, part)

def commutator(f: SpectralField, g: SpectralField, h: SpectralField, part: DyadicPartition) -> SpectralField:
    """C(f, g, h) = pi_0(pi_<(f, g), h) - f pi_0(g, h), dealiased."""
    left = paraproduct(paraproduct(f, g, ParaproductKind.LT, part), h, ParaproductKind.RES, part)
    right = multiply(f, paraproduct(g, h, ParaproductKind.RES, part))
    return left - right

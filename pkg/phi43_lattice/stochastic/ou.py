"""Exact per-mode sampling of the stochastic convolution u1 and its Wick powers."""
import logging
from typing import List, Optional

import numpy as np

from ..errors import InvalidParameterException
from ..model.field import LatticeField
from ..model.grid import GridSpec
from ..model.ou_state import OUState
from ..model.symbol import Cutoff, SymbolParams, Variant
from ..operators import eigenvalues, stationary_variance
from .noise import NoisePurpose, NoiseStream


logger = logging.getLogger(__name__)


def ou_sample_stationary(grid: GridSpec, variant: Variant, seed: int,
                         replica: int = 0,
                         coupling_band: Optional[int] = None,
                         continuum_factor: float = 1.0) -> OUState:
    """Draw a_k from the stationary law: independent complex Gaussians with E|a_k|^2 = V_0(k), a_{-k} = conj(a_k).

    Args:
        grid (GridSpec): Lattice of resolution N.
        variant (Variant): Lattice or galerkin symbol.
        seed (int): Master seed.
        replica (int, optional): Replica index. Defaults to 0.
        coupling_band (Optional[int], optional): Band of the shared noise stream, at least N. Defaults to N.
        continuum_factor (float, optional): c of the galerkin symbol. Defaults to 1.0.

    Returns:
        OUState: State at t = 0 with stream position 0.
    """
    band = grid.N if coupling_band is None else coupling_band
    if band < grid.N:
        raise InvalidParameterException("Coupling band must cover the lattice band", {'couplingBand': band, 'N': grid.N})
    params = SymbolParams(grid.N, variant, Cutoff.SHARP, continuum_factor)
    stream = NoiseStream(seed, replica, band)
    xi = stream.draw(0, grid.N, NoisePurpose.STATIONARY)
    coeffs = np.sqrt(stationary_variance(params, grid.N)) * np.asarray(xi.coeffs)
    return OUState(grid, params, 0.0, coeffs, stream, 0)

def ou_transition(state: OUState, h: float) -> OUState:
    """a_k <- e^{-lambda_k h} a_k + eta_k, eta_k of variance V_0(k)(1 - e^{-2 lambda_k h}); exact in law for any h.

    Args:
        state (OUState): Current state.
        h (float): Step, positive.

    Raises:
        InvalidParameterException: If h <= 0.

    Returns:
        OUState: State at t + h, stream advanced by one draw.
    """
    if h <= 0:
        raise InvalidParameterException("OU step must be positive", {'h': h})
    N = state.grid.N
    decay = np.exp(-h * eigenvalues(state.params, N))
    scale = np.sqrt(stationary_variance(state.params, N) * (1.0 - decay ** 2))
    xi = state.stream.draw(state.position, N)
    coeffs = decay * state.coeffs + scale * np.asarray(xi.coeffs)
    return OUState(state.grid, state.params, state.t + h, coeffs, state.stream, state.position + 1)

def ou_path(state: OUState, steps: int, dt: float) -> List[OUState]:
    """The states at t, t + dt, ..., t + steps*dt (steps + 1 entries)."""
    path = [state]
    for _ in range(steps):
        path.append(ou_transition(path[-1], dt))
    return path

def wick_power(u1: LatticeField, n: int, C0: float) -> LatticeField:
    """Pointwise Wick power: u^2 - C0 (n = 2) or u^3 - 3 C0 u (n = 3).

    Raises:
        InvalidParameterException: If n is not 2 or 3.
    """
    values = np.asarray(u1.values)
    if n == 2:
        return LatticeField(values ** 2 - C0, u1.grid)
    if n == 3:
        return LatticeField(values ** 3 - 3.0 * C0 * values, u1.grid)
    raise InvalidParameterException("Wick power order must be 2 or 3", {'n': n})

"""Counter-based Gaussian noise keyed by (seed, replica, purpose, draw index).

Every draw builds its own Philox generator from a SeedSequence over the key, so any draw can
be regenerated without replaying the stream and the result never depends on worker scheduling.
Draws are made on a fixed coupling band and cropped, so integrators of different resolutions
see bitwise identical standard normals on their shared modes.
"""
from enum import IntEnum
from functools import lru_cache
import logging
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..errors import InvalidParameterException
from ..model.field import SpectralField
from .. import utils


logger = logging.getLogger(__name__)

RNG_SCHEME = 'philox4x64-seedsequence(seed,replica,purpose,draw)'


class NoisePurpose(IntEnum):
    INCREMENT = 0
    """Per-step increments of the shared Brownian coefficients."""
    STATIONARY = 1
    """Stationary initial draw of the stochastic convolution."""
    INITIAL_DATA = 2
    """Random initial datum of the nonlinear equation."""
    PROBE = 3
    """Probe point positions of block estimators."""
    COUPLING = 4
    """Independent complement of the stationary draw in the joint law of two coupled discretisations."""


@lru_cache(maxsize=32)
def _orbit_representatives(band: int) -> Tuple[np.ndarray, np.ndarray]:
    """Flat indices of one frequency per orbit {k, -k}, k != 0, and of its reflection."""
    k1, k2, k3 = utils.frequency_grid(band)
    positive = (k1 > 0) | ((k1 == 0) & (k2 > 0)) | ((k1 == 0) & (k2 == 0) & (k3 > 0))
    positive = np.broadcast_to(positive, (2 * band + 1,) * 3)
    flat = np.flatnonzero(positive)
    side = 2 * band + 1
    reflected = (side ** 3 - 1) - flat
    return flat, reflected


class NoiseStream:
    """Stateless description of one replica's noise; `draw(index)` is a pure function of the key."""

    seed: int

    replica: int

    band: int
    """Coupling band every draw is generated on."""

    def __init__(self, seed: int, replica: int, band: int) -> None:
        if band < 1:
            raise InvalidParameterException("Noise coupling band must be positive", {'band': band})
        self.seed = seed
        self.replica = replica
        self.band = band

    def generator(self, purpose: NoisePurpose, index: int) -> np.random.Generator:
        sequence = np.random.SeedSequence([int(self.seed), int(self.replica), int(purpose), int(index)])
        return np.random.Generator(np.random.Philox(sequence))

    def draw(self, index: int, band: Optional[int] = None, purpose: NoisePurpose = NoisePurpose.INCREMENT) -> SpectralField:
        """Hermitian cube of standard complex normals xi_k, E|xi_k|^2 = 1, xi_0 = 0.

        One complex normal per orbit {k, -k} (real and imaginary parts of variance 1/2);
        xi_{-k} = conj(xi_k).

        Args:
            index (int): Draw index (the step counter for increments).
            band (Optional[int]): Crop to this band, at most the coupling band.
            purpose (NoisePurpose): Independent key space.

        Raises:
            InvalidParameterException: If band exceeds the coupling band.

        Returns:
            SpectralField: The draw.
        """
        band = self.band if band is None else band
        if band > self.band:
            raise InvalidParameterException("Requested band exceeds the coupling band", {'band': band, 'couplingBand': self.band})
        flat, reflected = _orbit_representatives(self.band)
        normals = self.generator(purpose, index).standard_normal((2, flat.size)) * np.sqrt(0.5)
        values = normals[0] + 1j * normals[1]
        cube = np.zeros((2 * self.band + 1) ** 3, dtype=complex)
        cube[flat] = values
        cube[reflected] = np.conj(values)
        cube = cube.reshape((2 * self.band + 1,) * 3)
        if band != self.band:
            cube = utils.embed_centered(cube, band)
        return SpectralField(cube)

    def uniform(self, index: int, size: Tuple[int, ...], purpose: NoisePurpose = NoisePurpose.PROBE) -> np.ndarray:
        return self.generator(purpose, index).uniform(-1.0, 1.0, size)

    def to_json_object(self) -> Dict[str, Any]:
        return {
            'scheme': RNG_SCHEME,
            'seed': self.seed,
            'replica': self.replica,
            'band': self.band
        }

    def __repr__(self) -> str:
        return f"NoiseStream(seed={self.seed}, replica={self.replica}, band={self.band})"

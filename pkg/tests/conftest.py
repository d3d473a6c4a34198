from typing import Callable

import numpy as np
import pytest

from phi43_lattice.lattice_spectral import hermitian_project
from phi43_lattice.model.field import SpectralField
from phi43_lattice.model.renorm import RenormConstants
from phi43_lattice.model.study_config import StudyConfig, StudyKind
from phi43_lattice import utils


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)

@pytest.fixture
def random_field(rng) -> Callable[[int], SpectralField]:
    """Factory of random Hermitian mean-zero fields of a given band."""
    def build(band: int) -> SpectralField:
        shape = (2 * band + 1,) * 3
        return hermitian_project(SpectralField(rng.standard_normal(shape) + 1j * rng.standard_normal(shape)))
    return build

@pytest.fixture
def flat_constants() -> Callable[[int], RenormConstants]:
    """Constants with a zero mass shift, for steps whose renormalisation is switched off anyway."""
    def build(N: int) -> RenormConstants:
        return RenormConstants(N, 0.0, 0.0, 0.0, 0.0, {triple: 0.0 for triple in utils.nonzero_triples()})
    return build

@pytest.fixture
def small_config(tmp_path) -> Callable[..., StudyConfig]:
    """Small study config writing into a temporary directory; keyword arguments override."""
    def build(study: StudyKind, **overrides) -> StudyConfig:
        values = dict(study=study, N_list=[1, 2], N_ref=2, T=0.01, dt=0.002, samples=4, seed=7,
                      output=str(tmp_path / 'out'), record_every=1, probe_points=4, t_probe=0.01)
        values.update(overrides)
        return StudyConfig(**values).check()
    return build

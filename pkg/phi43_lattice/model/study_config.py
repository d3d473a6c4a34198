from __future__ import annotations # Allow referencing enclosing class in typings
from enum import Enum
import math
from typing import Any, Dict, List

from ..errors import InvalidParameterException
from .analysis import AnalysisParams
from .symbol import Variant


class StudyKind(Enum):
    RENORM_SCALING = 'renorm-scaling'
    OU_LAW = 'ou-law'
    BLOCK_VARIANCE = 'block-variance'
    ENHANCED_NORMS = 'enhanced-norms'
    CONVERGE = 'converge'
    SIMULATE = 'simulate'


class BlockObject(Enum):
    U1_DIFF = 'u1_diff'
    """u1^eps - u1_bar, target growth 2^{q(kappa+1)}"""
    WICK2_DIFF = 'wick2_diff'
    """(u1^eps)^{<>2} - (u1_bar)^{<>2}, target growth 2^{q(kappa+2)}"""
    U2_DIFF = 'u2_diff'
    """u2^eps - u2_bar, target growth 2^{q(kappa-1)}"""


class StudyConfig:
    """Every experiment-level parameter of one study run, as read from the flat-key config file."""

    study: StudyKind

    N_list: List[int]

    N_ref: int

    T: float

    dt: float

    samples: int

    seed: int

    analysis: AnalysisParams

    L: float
    """Blow-up threshold of ||.||_{-z}."""

    output: str

    threads: int

    record_every: int
    """Records are emitted every `record_every` steps and at the final or stopping step; norms and blow-up are checked every step."""

    galerkin_symbol_factor: float

    oversample: int

    probe_points: int

    block_object: BlockObject

    t_probe: float

    diagnostic_delta: float
    """delta of the enhanced-noise norm collection."""

    reference_variant: Variant

    def __init__(self, study: StudyKind = StudyKind.CONVERGE,
                       N_list: List[int] = [2, 4, 8],
                       N_ref: int = 16,
                       T: float = 0.1,
                       dt: float = 2e-4,
                       samples: int = 20,
                       seed: int = 0,
                       analysis: AnalysisParams = AnalysisParams(),
                       L: float = 50.0,
                       output: str = 'results',
                       threads: int = 1,
                       record_every: int = 10,
                       galerkin_symbol_factor: float = math.pi ** 2,
                       oversample: int = 2,
                       probe_points: int = 8,
                       block_object: BlockObject = BlockObject.U1_DIFF,
                       t_probe: float = 0.1,
                       diagnostic_delta: float = 0.4,
                       reference_variant: Variant = Variant.GALERKIN) -> None:
        self.study = study
        self.N_list = list(N_list)
        self.N_ref = N_ref
        self.T = T
        self.dt = dt
        self.samples = samples
        self.seed = seed
        self.analysis = analysis
        self.L = L
        self.output = output
        self.threads = threads
        self.record_every = record_every
        self.galerkin_symbol_factor = galerkin_symbol_factor
        self.oversample = oversample
        self.probe_points = probe_points
        self.block_object = block_object
        self.t_probe = t_probe
        self.diagnostic_delta = diagnostic_delta
        self.reference_variant = reference_variant

    def check(self) -> StudyConfig:
        """Verify the config invariants.

        Raises:
            InvalidParameterException: On the first inconsistency found.

        Returns:
            StudyConfig: self, for chaining.
        """
        if not self.N_list:
            raise InvalidParameterException("N_list must not be empty", {})
        if any(N < 1 for N in self.N_list) or self.N_ref < 1:
            raise InvalidParameterException("Lattice cuts must be positive", {'N_list': self.N_list, 'N_ref': self.N_ref})
        if not 0 < self.dt <= self.T:
            raise InvalidParameterException("Time step must satisfy 0 < dt <= T", {'dt': self.dt, 'T': self.T})
        if self.samples < 1:
            raise InvalidParameterException("At least one sample is required", {'samples': self.samples})
        if self.threads < 1 or self.record_every < 1:
            raise InvalidParameterException("threads and record_every must be positive", {'threads': self.threads, 'record_every': self.record_every})
        if self.oversample < 2:
            raise InvalidParameterException("Oversample factor must be at least 2", {'oversample': self.oversample})
        if not 0 < self.t_probe or self.probe_points < 1:
            raise InvalidParameterException("t_probe and probe_points must be positive", {'t_probe': self.t_probe, 'probe_points': self.probe_points})
        if self.L <= 0 or self.galerkin_symbol_factor <= 0:
            raise InvalidParameterException("L and galerkin_symbol_factor must be positive", {'L': self.L, 'galerkin_symbol_factor': self.galerkin_symbol_factor})
        self.analysis.check()
        return self

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))

    @classmethod
    def from_json_object(cls, json_object: Dict[str, Any]) -> StudyConfig:
        """Build from the flat-key form (`analysis.kappa`, ...); missing keys take their defaults."""
        defaults = cls()
        analysis = AnalysisParams.from_json_object({
            key.split('.', 1)[1]: value for key, value in json_object.items() if key.startswith('analysis.')
        })
        return cls(
            StudyKind(json_object.get('study', defaults.study.value)),
            json_object.get('N_list', defaults.N_list),
            json_object.get('N_ref', defaults.N_ref),
            json_object.get('T', defaults.T),
            json_object.get('dt', defaults.dt),
            json_object.get('samples', defaults.samples),
            json_object.get('seed', defaults.seed),
            analysis,
            json_object.get('L', defaults.L),
            json_object.get('output', defaults.output),
            json_object.get('threads', defaults.threads),
            json_object.get('record_every', defaults.record_every),
            json_object.get('galerkin_symbol_factor', defaults.galerkin_symbol_factor),
            json_object.get('oversample', defaults.oversample),
            json_object.get('probe_points', defaults.probe_points),
            BlockObject(json_object.get('block_object', defaults.block_object.value)),
            json_object.get('t_probe', defaults.t_probe),
            json_object.get('diagnostic_delta', defaults.diagnostic_delta),
            Variant(json_object.get('reference_variant', defaults.reference_variant.value))
        )

    def to_json_object(self) -> Dict[str, Any]:
        json_object = {
            'study': self.study.value,
            'N_list': self.N_list,
            'N_ref': self.N_ref,
            'T': self.T,
            'dt': self.dt,
            'samples': self.samples,
            'seed': self.seed,
            'L': self.L,
            'output': self.output,
            'threads': self.threads,
            'record_every': self.record_every,
            'galerkin_symbol_factor': self.galerkin_symbol_factor,
            'oversample': self.oversample,
            'probe_points': self.probe_points,
            'block_object': self.block_object.value,
            't_probe': self.t_probe,
            'diagnostic_delta': self.diagnostic_delta,
            'reference_variant': self.reference_variant.value
        }
        json_object.update({f"analysis.{key}": value for key, value in self.analysis.to_json_object().items()})
        return json_object

from __future__ import annotations # Allow referencing enclosing class in typings
from enum import Enum
import math
from typing import Any, Dict, List, Optional, Tuple

from .field import SpectralField
from .renorm import RenormConstants
from .symbol import SymbolParams, Variant


class SimStatus(Enum):
    RUNNING = 'running'
    BLOWN_UP = 'blown-up'
    DONE = 'done'


class SimState:
    """Snapshot of one integrator: the spectrum of Phi (lattice, band N) or Phi_bar (galerkin working band)."""

    params: SymbolParams

    phi: SpectralField

    t: float

    consts: RenormConstants

    blowup_threshold: float
    """L of the stopping time tau_L = inf{t : ||Phi(t)||_{-z} >= L}."""

    status: SimStatus

    step: int

    last_norm: Optional[float]
    """Most recent ||phi||_{-z}, None until first evaluated."""

    def __init__(self, params: SymbolParams,
                       phi: SpectralField,
                       t: float,
                       consts: RenormConstants,
                       blowup_threshold: float,
                       status: SimStatus = SimStatus.RUNNING,
                       step: int = 0,
                       last_norm: Optional[float] = None) -> None:
        self.params = params
        self.phi = phi
        self.t = t
        self.consts = consts
        self.blowup_threshold = blowup_threshold
        self.status = status
        self.step = step
        self.last_norm = last_norm

    @property
    def variant(self) -> Variant:
        return self.params.variant

    def evolved(self, phi: SpectralField, h: float) -> SimState:
        return SimState(self.params, phi, self.t + h, self.consts, self.blowup_threshold, self.status, self.step + 1, self.last_norm)

    def with_norm(self, norm: float) -> SimState:
        status = SimStatus.BLOWN_UP if norm >= self.blowup_threshold else self.status
        return SimState(self.params, self.phi, self.t, self.consts, self.blowup_threshold, status, self.step, norm)

    def with_status(self, status: SimStatus) -> SimState:
        return SimState(self.params, self.phi, self.t, self.consts, self.blowup_threshold, status, self.step, self.last_norm)

    def __repr__(self) -> str:
        return f"SimState({self.params.variant.value}, N={self.params.N}, t={self.t:g}, status={self.status.value})"


class TrajectoryRecord:

    t: float

    variant: Variant

    norm_minus_z: float

    status: SimStatus

    def __init__(self, t: float, variant: Variant, norm_minus_z: float, status: SimStatus) -> None:
        self.t = t
        self.variant = variant
        self.norm_minus_z = norm_minus_z
        self.status = status

    @classmethod
    def columns(cls) -> List[str]:
        return ['t', 'variant', 'norm_minus_z', 'status']

    def to_row(self) -> List[Any]:
        return [self.t, self.variant.value, self.norm_minus_z, self.status.value]

    @classmethod
    def from_row(cls, row: Dict[str, str]) -> TrajectoryRecord:
        return cls(float(row['t']), Variant(row['variant']), float(row['norm_minus_z']), SimStatus(row['status']))


class CoupledRun:
    """Outcome of integrating the lattice equation and its reference on one shared noise path."""

    N: int

    N_ref: int

    seed: int

    replica: int

    lattice: List[TrajectoryRecord]

    reference: List[TrajectoryRecord]

    error_curve: List[Tuple[float, float]]
    """(t, ||Ext Phi^eps(t) - Phi_ref(t)||_{-z}) at the recorded times."""

    sup_error: float
    """Largest finite error over every step up to stop_time, recorded or not."""

    stop_time: float

    status: SimStatus

    tail_energy: float
    """Largest fraction of reference energy seen in the top shell of the working band."""

    def __init__(self, N: int, N_ref: int, seed: int, replica: int,
                       lattice: List[TrajectoryRecord],
                       reference: List[TrajectoryRecord],
                       error_curve: List[Tuple[float, float]],
                       stop_time: float,
                       status: SimStatus,
                       tail_energy: float = 0.0,
                       sup_error: Optional[float] = None) -> None:
        self.N = N
        self.N_ref = N_ref
        self.seed = seed
        self.replica = replica
        self.lattice = lattice
        self.reference = reference
        self.error_curve = error_curve
        self.stop_time = stop_time
        self.status = status
        self.tail_energy = tail_energy
        if sup_error is None:
            sup_error = max((e for _, e in error_curve if math.isfinite(e)), default=0.0)
        self.sup_error = sup_error

    @property
    def blown_up(self) -> bool:
        return self.status == SimStatus.BLOWN_UP

    def to_json_object(self) -> Dict[str, Any]:
        return {
            'N': self.N,
            'NRef': self.N_ref,
            'seed': self.seed,
            'replica': self.replica,
            'stopTime': self.stop_time,
            'status': self.status.value,
            'supError': self.sup_error,
            'tailEnergy': self.tail_energy
        }


class RemainderPath:
    """u3 = Ext Phi - u1 - u2 along a path, with its ||.||_gamma norms."""

    times: List[float]

    fields: List[SpectralField]

    norms: List[float]

    gamma: float

    def __init__(self, times: List[float], fields: List[SpectralField], norms: List[float], gamma: float) -> None:
        self.times = times
        self.fields = fields
        self.norms = norms
        self.gamma = gamma

    def __len__(self) -> int:
        return len(self.times)


class RunConfig:
    """Parameters of one coupled lattice/reference integration."""

    N: int

    N_ref: int

    T: float

    dt: float

    z: float

    L: float

    record_every: int

    galerkin_symbol_factor: float

    oversample: int

    reference_variant: Variant

    initial_band: int
    """Band of the random initial datum shared by both integrators."""

    cubic: bool

    renormalise: bool

    def __init__(self, N: int, N_ref: int,
                       T: float = 0.1,
                       dt: float = 2e-4,
                       z: float = 0.6,
                       L: float = 50.0,
                       record_every: int = 10,
                       galerkin_symbol_factor: float = math.pi ** 2,
                       oversample: int = 2,
                       reference_variant: Variant = Variant.GALERKIN,
                       initial_band: int = 2,
                       cubic: bool = True,
                       renormalise: bool = True) -> None:
        self.N = N
        self.N_ref = N_ref
        self.T = T
        self.dt = dt
        self.z = z
        self.L = L
        self.record_every = record_every
        self.galerkin_symbol_factor = galerkin_symbol_factor
        self.oversample = oversample
        self.reference_variant = reference_variant
        self.initial_band = initial_band
        self.cubic = cubic
        self.renormalise = renormalise

    @property
    def horizon(self) -> float:
        """T and the level L both cap the time window (tau_L is taken as tau_L ^ L)."""
        return min(self.T, self.L)

    @property
    def reference_band(self) -> int:
        """Working band of the reference: 3 N_ref for galerkin, N_ref for a lattice reference."""
        return 3 * self.N_ref if self.reference_variant == Variant.GALERKIN else self.N_ref

    def to_json_object(self) -> Dict[str, Any]:
        return {
            'N': self.N,
            'NRef': self.N_ref,
            'T': self.T,
            'dt': self.dt,
            'z': self.z,
            'L': self.L,
            'recordEvery': self.record_every,
            'galerkinSymbolFactor': self.galerkin_symbol_factor,
            'oversample': self.oversample,
            'referenceVariant': self.reference_variant.value,
            'initialBand': self.initial_band,
            'cubic': self.cubic,
            'renormalise': self.renormalise
        }

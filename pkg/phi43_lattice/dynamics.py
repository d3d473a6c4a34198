"""Time integration of the renormalised lattice equation and its spectral-Galerkin reference under shared noise."""
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidDataException, InvalidParameterException
from .lattice_spectral import analyze, dft_forward, dft_inverse, hermitian_project, synthesize
from .model.field import SpectralField
from .model.grid import GridSpec
from .model.ou_state import BASIS_FACTOR, OUState
from .model.renorm import RenormConstants
from .model.sim_state import CoupledRun, RemainderPath, RunConfig, SimState, SimStatus, TrajectoryRecord
from .model.symbol import Cutoff, SymbolParams, Variant
from .operators import eigenvalues, stationary_variance
from .paracontrolled import DyadicPartition, build_dyadic_partition, holder_norm
from .stochastic.noise import NoisePurpose, NoiseStream
from .stochastic.ou import ou_sample_stationary, ou_transition
from .stochastic.renormalisation import compute_renorm_constants
from . import utils


logger = logging.getLogger(__name__)


def initial_datum(seed: int, band: int = 2) -> SpectralField:
    """Fixed-seed Gaussian field of band `band`: coefficients 2^{3/2} xi_k / (1 + |k|^2).

    The same datum (cropped) starts every resolution, so Ext Phi_0^eps = Phi_0 once N >= band.
    """
    xi = NoiseStream(seed, 0, band).draw(0, band, NoisePurpose.INITIAL_DATA)
    return SpectralField(BASIS_FACTOR * np.asarray(xi.coeffs) / (1.0 + utils.frequency_square_norm(band)))

def _noise_term(params: SymbolParams, band: int, h: float, noise_increment: SpectralField, decay: np.ndarray) -> np.ndarray:
    scale = np.sqrt(stationary_variance(params, band) * (1.0 - decay ** 2))
    return BASIS_FACTOR * scale * np.asarray(noise_increment.with_band(band).coeffs)

def _check_h(h: float) -> None:
    if h <= 0:
        raise InvalidParameterException("Time step must be positive", {'h': h})

def step_lattice_phi(state: SimState, h: float, noise_increment: SpectralField, cubic: bool = True, renormalise: bool = True) -> SimState:
    """One exponential Euler step of the lattice equation.

    phi <- e^{-lambda h} phi + (exact OU increment) + h e^{-lambda h/2} F^,
    F = -Q_N[(Ext Phi)^3] + (3 C0 - 9 C1) Phi, the cube taken pointwise on Lambda_eps.

    Args:
        state (SimState): Lattice state (band N).
        h (float): Step.
        noise_increment (SpectralField): Standard normals of the shared stream (any band >= N).
        cubic (bool, optional): Keep the cubic term. Defaults to True.
        renormalise (bool, optional): Keep the mass shift. Defaults to True.

    Raises:
        InvalidParameterException: If h <= 0.

    Returns:
        SimState: The advanced state.
    """
    _check_h(h)
    N = state.params.N
    lam = eigenvalues(state.params, N)
    decay = np.exp(-h * lam)
    phi = np.asarray(state.phi.coeffs)
    forcing = np.zeros_like(phi)
    if cubic:
        values = np.asarray(dft_inverse(state.phi, GridSpec(N)).values)
        forcing = forcing - np.asarray(dft_forward(values ** 3).coeffs)
    if renormalise:
        forcing = forcing + state.consts.mass_shift * phi
    updated = decay * phi + _noise_term(state.params, N, h, noise_increment, decay) + h * np.exp(-0.5 * h * lam) * forcing
    return state.evolved(hermitian_project(SpectralField(updated)), h)

def step_galerkin_phi(state: SimState, h: float, noise_increment: SpectralField, cubic: bool = True, renormalise: bool = True) -> SimState:
    """One exponential Euler step of the galerkin reference on its working band B.

    Noise enters only on |k|_inf <= N_ref; the cube is sampled on a 4B+1 grid (no alias reaches
    the band) and truncated to B; the mass shift uses C0_bar and C1_bar = C11_bar.

    Raises:
        InvalidParameterException: If h <= 0.
    """
    _check_h(h)
    band = state.phi.band
    lam = eigenvalues(state.params, band)
    decay = np.exp(-h * lam)
    phi = np.asarray(state.phi.coeffs)
    forcing = np.zeros_like(phi)
    if cubic:
        values = synthesize(state.phi, 4 * band + 1).real
        forcing = forcing - analyze(values ** 3, band)
    if renormalise:
        forcing = forcing + state.consts.mass_shift_bar * phi
    updated = decay * phi + _noise_term(state.params, band, h, noise_increment, decay) + h * np.exp(-0.5 * h * lam) * forcing
    return state.evolved(hermitian_project(SpectralField(updated)), h)

def step_phi(state: SimState, h: float, noise_increment: SpectralField, cubic: bool = True, renormalise: bool = True) -> SimState:
    if state.variant == Variant.LATTICE:
        return step_lattice_phi(state, h, noise_increment, cubic, renormalise)
    return step_galerkin_phi(state, h, noise_increment, cubic, renormalise)

def _top_shell_fraction(spec: SpectralField, N_ref: int) -> float:
    energy = np.abs(np.asarray(spec.coeffs)) ** 2
    total = float(energy.sum())
    if total == 0.0:
        return 0.0
    return float(energy[utils.frequency_sup_norm(spec.band) > 2 * N_ref].sum() / total)


class _LatticeTrack:
    """Bookkeeping of one lattice resolution inside a sweep."""

    def __init__(self, state: SimState) -> None:
        self.state = state
        self.records: List[TrajectoryRecord] = []
        self.reference_records: List[TrajectoryRecord] = []
        self.error_curve: List[Tuple[float, float]] = []
        self.tail_energy = 0.0
        self.sup_error = 0.0
        self.stopped = False

    @property
    def N(self) -> int:
        return self.state.params.N

    def close(self, t: float, reference_variant: Variant) -> None:
        """Record a non-finite state and stop the track."""
        self.records.append(TrajectoryRecord(t, Variant.LATTICE, float('inf'), SimStatus.BLOWN_UP))
        self.reference_records.append(TrajectoryRecord(t, reference_variant, float('inf'), SimStatus.BLOWN_UP))
        self.error_curve.append((t, float('inf')))
        self.state = self.state.with_status(SimStatus.BLOWN_UP)
        self.stopped = True


def run_coupled_sweep(config: RunConfig, N_list: Sequence[int], seed: int,
                      replica: int = 0,
                      consts: Optional[Dict[int, RenormConstants]] = None,
                      ref_consts: Optional[RenormConstants] = None,
                      part: Optional[DyadicPartition] = None) -> List[CoupledRun]:
    """Integrate one reference at N_ref and the lattice equation at every N of `N_list` on one shared noise path.

    Every integrator starts from the same band-`initial_band` datum and consumes the same
    increments, drawn on the coupling band max(N_list, N_ref) and cropped. The -z norms and
    the error are evaluated after every step; a lattice track stops at the first step where
    its own or the reference's norm reaches L, and the whole sweep stops when the reference
    does. Records are emitted every `record_every` steps, at the last step and at the
    stopping step.

    Args:
        config (RunConfig): Run parameters; `config.N` is ignored in favour of `N_list`.
        N_list (Sequence[int]): Lattice cuts.
        seed (int): Master seed (noise and initial datum).
        replica (int, optional): Replica index of the noise stream. Defaults to 0.
        consts (Optional[Dict[int, RenormConstants]], optional): Constants by N, computed when missing.
        ref_consts (Optional[RenormConstants], optional): Constants of N_ref, computed when missing.
        part (Optional[DyadicPartition], optional): Partition for the -z norms.

    Raises:
        InvalidParameterException: On inconsistent parameters.

    Returns:
        List[CoupledRun]: One outcome per entry of `N_list`, same order.
    """
    N_list = list(N_list)
    if not N_list or min(N_list) < 1 or config.N_ref < 1 or config.dt <= 0 or config.T <= 0 or config.record_every < 1:
        raise InvalidParameterException("Inconsistent coupled run configuration", {**config.to_json_object(), 'N_list': N_list})
    if config.reference_variant == Variant.LATTICE and config.N_ref < max(N_list):
        raise InvalidParameterException("A lattice reference needs N_ref >= N", {**config.to_json_object(), 'N_list': N_list})
    consts = dict(consts or {})
    for N in N_list:
        if N not in consts:
            consts[N] = compute_renorm_constants(N, galerkin_symbol_factor=config.galerkin_symbol_factor)
    if ref_consts is None:
        ref_consts = consts.get(config.N_ref) or compute_renorm_constants(config.N_ref, galerkin_symbol_factor=config.galerkin_symbol_factor)
    if part is None:
        part = build_dyadic_partition(max(N_list + [config.N_ref]))
    ref_factor = config.galerkin_symbol_factor if config.reference_variant == Variant.GALERKIN else 1.0
    ref_params = SymbolParams(config.N_ref, config.reference_variant, Cutoff.SHARP, ref_factor)
    ref_band = config.reference_band
    stream = NoiseStream(seed, replica, max(N_list + [config.N_ref]))
    phi0 = initial_datum(seed, config.initial_band)
    tracks = [_LatticeTrack(SimState(SymbolParams(N, Variant.LATTICE, Cutoff.SHARP), phi0.with_band(N), 0.0, consts[N], config.L)) for N in N_list]
    reference = SimState(ref_params, phi0.with_band(ref_band), 0.0, ref_consts, config.L)
    steps = int(round(config.horizon / config.dt))
    logger.info(f"--- Coupled run ---\n"
                f"- N: {N_list}, reference: {config.reference_variant.value} N_ref={config.N_ref} (band {ref_band})\n"
                f"- seed: {seed}, replica: {replica}\n"
                f"- steps: {steps} of dt={config.dt:g}, z={config.z:g}, L={config.L:g}\n")

    def norm(spec: SpectralField) -> float:
        return holder_norm(spec, -config.z, part, config.oversample)

    def evaluate(reference: SimState, emit: bool) -> SimState:
        reference = reference.with_norm(norm(reference.phi))
        shell = _top_shell_fraction(reference.phi, config.N_ref) if reference.variant == Variant.GALERKIN else 0.0
        for track in tracks:
            if track.stopped:
                continue
            band = max(ref_band, track.N)
            track.state = track.state.with_norm(norm(track.state.phi))
            error = norm(track.state.phi.with_band(band) - reference.phi.with_band(band))
            if math.isfinite(error):
                track.sup_error = max(track.sup_error, error)
            track.tail_energy = max(track.tail_energy, shell)
            stopping = track.state.status == SimStatus.BLOWN_UP or reference.status == SimStatus.BLOWN_UP
            if emit or stopping:
                track.records.append(TrajectoryRecord(track.state.t, Variant.LATTICE, track.state.last_norm, track.state.status))
                track.reference_records.append(TrajectoryRecord(reference.t, reference.variant, reference.last_norm, reference.status))
                track.error_curve.append((track.state.t, error))
            track.stopped = stopping
        return reference

    reference = evaluate(reference, True)
    for n in range(steps):
        if reference.status == SimStatus.BLOWN_UP or all(track.stopped for track in tracks):
            break
        xi = stream.draw(n)
        t = (n + 1) * config.dt
        try:
            with np.errstate(over='ignore', invalid='ignore'):
                reference = step_phi(reference, config.dt, xi, config.cubic, config.renormalise)
        except InvalidDataException:
            logger.warning(f"reference N_ref={config.N_ref} seed={seed} left the finite range at t={t:g}")
            reference = reference.with_status(SimStatus.BLOWN_UP)
            for track in tracks:
                if not track.stopped:
                    track.close(t, reference.variant)
            break
        for track in tracks:
            if track.stopped:
                continue
            try:
                with np.errstate(over='ignore', invalid='ignore'):
                    track.state = step_lattice_phi(track.state, config.dt, xi, config.cubic, config.renormalise)
            except InvalidDataException:
                # non-finite values between two norm checks
                logger.warning(f"lattice N={track.N} seed={seed} left the finite range at t={t:g}")
                track.close(t, reference.variant)
        reference = evaluate(reference, (n + 1) % config.record_every == 0 or n + 1 == steps)

    runs = []
    for track in tracks:
        status = SimStatus.BLOWN_UP if track.state.status == SimStatus.BLOWN_UP or track.reference_records[-1].status == SimStatus.BLOWN_UP else SimStatus.DONE
        stop_time = track.error_curve[-1][0]
        if status == SimStatus.BLOWN_UP:
            logger.info(f"coupled run N={track.N} seed={seed} replica={replica} blew up at t={stop_time:g}")
        runs.append(CoupledRun(track.N, config.N_ref, seed, replica, track.records, track.reference_records, track.error_curve, stop_time, status, track.tail_energy, track.sup_error))
    return runs

def run_coupled(config: RunConfig, seed: int,
                replica: int = 0,
                consts: Optional[RenormConstants] = None,
                ref_consts: Optional[RenormConstants] = None,
                part: Optional[DyadicPartition] = None) -> CoupledRun:
    """Integrate the lattice equation at N and the reference at N_ref on one shared noise path.

    Stops at T ^ L or at the first step where either -z norm reaches L; the error
    curve is e(t) = ||Ext Phi^eps(t) - Phi_ref(t)||_{-z}.

    Raises:
        InvalidParameterException: On inconsistent parameters.
    """
    return run_coupled_sweep(config, [config.N], seed, replica, {config.N: consts} if consts is not None else None, ref_consts, part)[0]

def run_lattice_path(config: RunConfig, seed: int, replica: int = 0,
                     consts: Optional[RenormConstants] = None,
                     ou: Optional[OUState] = None) -> Tuple[List[SimState], List[OUState]]:
    """Lattice trajectory at every step together with the stochastic convolution on the same noise.

    The OU state consumes the draws the lattice integrator consumes, so u1 is the linear part of
    Phi driven by the same increments.
    """
    if consts is None:
        consts = compute_renorm_constants(config.N, galerkin_symbol_factor=config.galerkin_symbol_factor)
    grid = GridSpec(config.N)
    if ou is None:
        ou = ou_sample_stationary(grid, Variant.LATTICE, seed, replica, config.N)
    state = SimState(SymbolParams(config.N), initial_datum(seed, config.initial_band).with_band(config.N), 0.0, consts, config.L)
    states, ou_states = [state], [ou]
    for n in range(int(round(config.horizon / config.dt))):
        xi = ou.stream.draw(ou.position, config.N)
        state = step_lattice_phi(state, config.dt, xi, config.cubic, config.renormalise)
        ou = ou_transition(ou, config.dt)
        states.append(state)
        ou_states.append(ou)
    return states, ou_states

def decompose_remainder(phi_path: List[SimState], ou_path: List[OUState], u2_path: List[SpectralField],
                        gamma: float, part: DyadicPartition, oversample: int = 2) -> RemainderPath:
    """u3(t) = Ext Phi(t) - u1(t) - u2(t) along a path, with ||u3(t)||_gamma.

    Raises:
        InvalidParameterException: If the paths differ in length or sampling times.

    Returns:
        RemainderPath: Times, u3 fields and norms.
    """
    if not len(phi_path) == len(ou_path) == len(u2_path):
        raise InvalidParameterException("Paths have different lengths", {'phi': len(phi_path), 'u1': len(ou_path), 'u2': len(u2_path)})
    times, fields, norms = [], [], []
    for state, ou, u2 in zip(phi_path, ou_path, u2_path):
        if abs(state.t - ou.t) > 1e-9 * max(1.0, abs(state.t)):
            raise InvalidParameterException("Paths are sampled at different times", {'phi': state.t, 'u1': ou.t})
        u3 = state.phi - ou.to_spectral() - u2
        times.append(state.t)
        fields.append(u3)
        norms.append(holder_norm(u3, gamma, part, oversample))
    return RemainderPath(times, fields, norms, gamma)

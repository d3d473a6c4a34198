"""Monte Carlo plumbing: worker pool with order-fixed reduction, log-log rate fits, coupled replicas and block estimators."""
import logging
from multiprocessing import Pool
import os
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from ..errors import InvalidParameterException
from ..model.estimates import BlockEstimate, RateFit
from ..model.field import SpectralField
from ..model.grid import GridSpec
from ..model.ou_state import OUState
from ..model.study_config import BlockObject, StudyConfig
from ..model.symbol import Cutoff, SymbolParams, Variant
from ..operators import eigenvalues, stationary_variance
from ..paracontrolled import build_dyadic_partition, lp_block
from ..stochastic.drivers import compute_u2, evaluate_at, wick_square
from ..stochastic.noise import NoisePurpose, NoiseStream
from ..stochastic.ou import ou_path, ou_sample_stationary
from ..stochastic.renormalisation import compute_C0


logger = logging.getLogger(__name__)

THREADS_ENV = 'PHI43_THREADS'


def resolve_threads(requested: int) -> int:
    """Worker count: the PHI43_THREADS environment variable wins over the config value.

    Raises:
        InvalidParameterException: If the resulting count is not a positive integer.
    """
    value = os.environ.get(THREADS_ENV)
    if value is None or value.strip() == '':
        threads = requested
    else:
        try:
            threads = int(value)
        except ValueError:
            raise InvalidParameterException(f"{THREADS_ENV} must be an integer", {THREADS_ENV: value})
    if threads < 1:
        raise InvalidParameterException("Worker count must be positive", {'threads': threads})
    return threads

def map_ordered(worker: Callable[[Any], Any], tasks: Sequence[Any], threads: int = 1) -> List[Any]:
    """Apply a module-level `worker` to every task; results come back in task order whatever the worker count."""
    tasks = list(tasks)
    threads = resolve_threads(threads)
    if threads == 1 or len(tasks) <= 1:
        return [worker(task) for task in tasks]
    logger.debug(f"dispatching {len(tasks)} tasks over {threads} workers")
    with Pool(processes=min(threads, len(tasks))) as pool:
        return pool.map(worker, tasks)

def rate_fit(points: Sequence[Tuple[float, float]]) -> RateFit:
    """Ordinary least squares on (log x, log y).

    Args:
        points (Sequence[Tuple[float, float]]): (x, y) pairs, x > 0, y > 0.

    Raises:
        InvalidParameterException: If fewer than 2 points, nonpositive values or all x equal.

    Returns:
        RateFit: Slope, intercept, r^2 and the slope's standard error.
    """
    points = list(points)
    if len(points) < 2:
        raise InvalidParameterException("A rate fit needs at least 2 points", {'points': len(points)})
    xs = np.array([x for x, _ in points], dtype=float)
    ys = np.array([y for _, y in points], dtype=float)
    if not (np.all(xs > 0) and np.all(ys > 0)):
        raise InvalidParameterException("Rate fits need positive values", {'x': xs.tolist(), 'y': ys.tolist()})
    if np.all(xs == xs[0]):
        raise InvalidParameterException("Rate fits need at least two distinct x", {'x': xs.tolist()})
    result = stats.linregress(np.log(xs), np.log(ys))
    stderr = float(result.stderr) if np.isfinite(result.stderr) else 0.0
    return RateFit(float(result.slope), float(result.intercept), float(result.rvalue) ** 2, stderr, len(points))

def lattice_params(N: int) -> SymbolParams:
    return SymbolParams(N, Variant.LATTICE, Cutoff.SHARP)

def reference_params(config: StudyConfig) -> SymbolParams:
    """Symbol of the reference discretisation at N_ref."""
    factor = config.galerkin_symbol_factor if config.reference_variant == Variant.GALERKIN else 1.0
    return SymbolParams(config.N_ref, config.reference_variant, Cutoff.SHARP, factor)

def wick_constant(params: SymbolParams) -> float:
    return compute_C0(params.N, params.variant, params.continuum_factor)

def coupling_band(config: StudyConfig, N: Optional[int] = None) -> int:
    """Band every draw of a study is generated on; fixed per study so all resolutions share their modes bitwise."""
    return max(config.N_list + [config.N_ref] + ([N] if N is not None else []))

def coupled_stationary(N: int, config: StudyConfig, replica: int) -> Tuple[OUState, OUState]:
    """Exact joint stationary law of u1 at N and of the reference u1 driven by the same Brownian coefficients.

    Per shared mode Cov(a, a_ref) = 1/(lambda + lambda_ref); a = sqrt(V) xi and
    a_ref = Cov/sqrt(V) xi + sqrt(V_ref - Cov^2/V) eta, with xi the stationary draw and eta the
    coupling draw of the same replica. Identical symbols give a_ref = a exactly.
    """
    ref = reference_params(config)
    band = coupling_band(config, N)
    params = lattice_params(N)
    stream = NoiseStream(config.seed, replica, band)
    xi = np.asarray(stream.draw(0, band, NoisePurpose.STATIONARY).coeffs)
    eta = np.asarray(stream.draw(0, band, NoisePurpose.COUPLING).coeffs)
    lam, lam_ref = eigenvalues(params, band), eigenvalues(ref, band)
    var, var_ref = stationary_variance(params, band), stationary_variance(ref, band)
    shared = (var > 0) & (var_ref > 0)
    with np.errstate(divide='ignore', invalid='ignore'):
        cross = np.where(shared, 1.0 / np.where(shared, lam + lam_ref, 1.0), 0.0)
        loading = np.where(shared, cross / np.sqrt(np.where(shared, var, 1.0)), np.sqrt(var_ref))
        loading = np.where(shared & (lam == lam_ref), np.sqrt(var), loading)
        residual = np.where(shared & (lam != lam_ref), np.clip(var_ref - loading ** 2, 0.0, None), 0.0)
    a = np.sqrt(var) * xi
    a_ref = loading * xi + np.sqrt(residual) * eta
    state = OUState(GridSpec(N), params, 0.0, SpectralField(a).with_band(N).coeffs, stream, 0)
    ref_state = OUState(GridSpec(config.N_ref), ref, 0.0, SpectralField(a_ref).with_band(config.N_ref).coeffs, stream, 0)
    return state, ref_state

def coupled_paths(N: int, config: StudyConfig, replica: int, t: float) -> Tuple[List[OUState], List[OUState]]:
    """u1 at N and the reference u1 on [0, t] with steps dt, both consuming the replica's shared increments."""
    ref = reference_params(config)
    band = coupling_band(config, N)
    steps = int(round(t / config.dt))
    start = ou_sample_stationary(GridSpec(N), Variant.LATTICE, config.seed, replica, band)
    ref_start = ou_sample_stationary(GridSpec(config.N_ref), ref.variant, config.seed, replica, band, ref.continuum_factor)
    return ou_path(start, steps, config.dt), ou_path(ref_start, steps, config.dt)

def block_difference(block_object: BlockObject, N: int, config: StudyConfig, replica: int, t: float) -> SpectralField:
    """X^eps(t) - X_ref(t) of one replica on the common band max(N, N_ref)."""
    band = max(N, config.N_ref)
    if block_object == BlockObject.U2_DIFF:
        path, ref_path = coupled_paths(N, config, replica, t)
        u2 = compute_u2(path, t, config.dt, wick_constant(path[0].params))[-1]
        u2_ref = compute_u2(ref_path, t, config.dt, wick_constant(ref_path[0].params))[-1]
        return u2.with_band(band) - u2_ref.with_band(band)
    state, ref_state = coupled_stationary(N, config, replica)
    if block_object == BlockObject.U1_DIFF:
        return state.to_spectral().with_band(band) - ref_state.to_spectral().with_band(band)
    wick = wick_square(state, wick_constant(state.params))
    wick_ref = wick_square(ref_state, wick_constant(ref_state.params))
    return wick.with_band(2 * band) - wick_ref.with_band(2 * band)

def probe_points(config: StudyConfig) -> np.ndarray:
    """Fixed probe set in [-1,1)^3 shared by every replica and resolution; row 0 is x0 = 0."""
    points = NoiseStream(config.seed, 0, 1).uniform(0, (config.probe_points, 3))
    points[0] = 0.0
    return points

def _block_replica(task: Tuple[BlockObject, int, List[int], float, StudyConfig, int, np.ndarray]) -> np.ndarray:
    block_object, N, qs, t, config, replica, probes = task
    difference = block_difference(block_object, N, config, replica, t)
    part = build_dyadic_partition(max(N, config.N_ref))
    return np.array([np.abs(evaluate_at(lp_block(difference, q, part), probes)) ** 2 for q in qs])

def block_variances(block_object: BlockObject, qs: Sequence[int], t: float, config: StudyConfig, N: Optional[int] = None) -> List[BlockEstimate]:
    """`mc_block_variance` for several blocks out of one set of replicas."""
    N = config.N_list[0] if N is None else N
    qs = list(qs)
    if config.samples < 1:
        raise InvalidParameterException("Block variance needs at least one sample", {'samples': config.samples})
    part = build_dyadic_partition(max(N, config.N_ref))
    if not qs or not all(-1 <= q <= part.jmax for q in qs):
        raise InvalidParameterException("Block index out of range", {'q': qs, 'jmax': part.jmax})
    if not 0 < t <= config.T:
        raise InvalidParameterException("Probe time must lie in (0, T]", {'t': t, 'T': config.T})
    probes = probe_points(config)
    tasks = [(block_object, N, qs, t, config, replica, probes) for replica in range(config.samples)]
    # (replica, block, probe)
    squares = np.array(map_ordered(_block_replica, tasks, config.threads))
    n = config.samples
    estimates = []
    for index, q in enumerate(qs):
        per_replica = squares[:, index, :].mean(axis=1)
        stderr = float(per_replica.std(ddof=1) / np.sqrt(n)) if n > 1 else float('inf')
        estimates.append(BlockEstimate(block_object, N, q, t, float(per_replica.mean()), stderr, float(squares[:, index, 0].mean()), n))
        logger.debug(f"{estimates[-1]}")
    return estimates

def mc_block_variance(block_object: BlockObject, q: int, t: float, config: StudyConfig, N: Optional[int] = None) -> BlockEstimate:
    """E|Delta_q (X^eps - X_ref)(t)(x)|^2 over `config.samples` coupled replicas.

    u1 and Wick square differences are sampled from the exact stationary joint law; u2
    differences integrate coupled paths from stationary starts over [0, t].

    Args:
        block_object (BlockObject): Difference object.
        q (int): Block index, -1 <= q <= jmax(max(N, N_ref)).
        t (float): Time in (0, T].
        config (StudyConfig): Study parameters (seed, samples, N_ref, dt, probes, threads).
        N (Optional[int], optional): Lattice cut, defaults to the first entry of N_list.

    Raises:
        InvalidParameterException: If samples < 1, q or t is out of range.

    Returns:
        BlockEstimate: Probe-set mean with standard error, plus the x0 estimate.
    """
    return block_variances(block_object, [q], t, config, N)[0]

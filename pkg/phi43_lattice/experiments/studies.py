"""Study drivers behind the command-line subcommands; each returns a `StudyResult` of tables and verdicts."""
import logging
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..dynamics import decompose_remainder, run_coupled_sweep, run_lattice_path
from ..errors import InvalidDataException, InvalidParameterException
from ..lattice_spectral import dft_inverse
from ..model.estimates import SampleSummary
from ..model.grid import GridSpec
from ..model.renorm import Correctors, RenormConstants
from ..model.sim_state import CoupledRun, RunConfig, TrajectoryRecord
from ..model.study_config import BlockObject, StudyConfig, StudyKind
from ..model.study_result import StudyResult, StudyTable
from ..model.symbol import SymbolParams, Variant
from ..operators import eigenvalues, stationary_variance
from ..paracontrolled import ParaproductKind, build_dyadic_partition, holder_norm, paraproduct
from ..stochastic.drivers import compute_K, compute_u2, resonant_renormalized, wick_square
from ..stochastic.ou import ou_path, ou_sample_stationary, ou_transition
from ..stochastic.renormalisation import compute_correctors, compute_renorm_constants
from .. import utils
from .harness import block_variances, coupling_band, map_ordered, rate_fit


logger = logging.getLogger(__name__)

EPS_C0_RATIO_BOUNDS = (0.85, 1.15)

Q_SLOPE_TOLERANCE = 0.4
"""Allowed excess of a fitted block slope over its target exponent."""

TAIL_ENERGY_WARNING = 1e-3

OU_LAW_MODES = [(1, 0, 0), (1, 1, 0), (1, 1, 1)]

RESONANT_STABILITY_FACTOR = 1.25
"""Largest admissible growth of the renormalised resonant median across the sweep."""

ENHANCED_COLUMNS = ['u1', 'wick2', 'u2', 'resonant', 'resonant_raw', 'u3_gamma', 'u1_gamma']


def _run_config(config: StudyConfig, N: int) -> RunConfig:
    return RunConfig(N, config.N_ref, config.T, config.dt, config.analysis.z, config.L, config.record_every,
                     config.galerkin_symbol_factor, config.oversample, config.reference_variant)

def _mean_stderr(values: np.ndarray) -> Tuple[float, float]:
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return float(values.mean()), math.inf
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))

def _strictly_decreasing(values: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))

def _fit_or_none(points: List[Tuple[float, float]]) -> Optional[Dict[str, Any]]:
    points = [(x, y) for x, y in points if x > 0 and y > 0 and math.isfinite(y)]
    if len({x for x, _ in points}) < 2:
        return None
    return rate_fit(points).to_json_object()

def _symbol_bounds_summary(N: int) -> Dict[str, Any]:
    """Bounds c_f <= f <= c_f_bar and whether every lattice eigenvalue at N satisfies c_f |k|^2 <= lambda_k <= c_f_bar |k|^2."""
    params = SymbolParams(N, Variant.LATTICE)
    square = utils.frequency_square_norm(N)
    nonzero = square > 0
    scaled = eigenvalues(params, N)[nonzero] / square[nonzero]
    return {
        'c_f': params.c_f,
        'c_f_bar': params.c_f_bar,
        'eigenvaluesWithinBounds': bool(scaled.min() >= params.c_f - 1e-9 and scaled.max() <= params.c_f_bar + 1e-9)
    }

def renorm_scaling_study(config: StudyConfig) -> StudyResult:
    """Constants over N_list with the scalings C0 ~ 1/eps, C11 ~ log(1/eps) and C12 ~ 1.

    Fit diagnostics need at least three resolutions; with fewer the tables are still written.
    """
    N_list = sorted(set(config.N_list))
    all_consts = [compute_renorm_constants(N, galerkin_symbol_factor=config.galerkin_symbol_factor) for N in N_list]
    constants = StudyTable('constants', RenormConstants.columns(), [consts.to_row() for consts in all_consts])
    scaling = StudyTable('scaling', ['N', 'eps', 'C0', 'eps_C0', 'C11', 'C11_over_log', 'C12_max', 'C12_min'])
    for consts in all_consts:
        c12 = list(consts.C12.values())
        scaling.append([consts.N, consts.eps, consts.C0, consts.eps * consts.C0, consts.C11, consts.C11 / math.log(1.0 / consts.eps), max(c12), min(c12)])
    summary: Dict[str, Any] = {'N': N_list, 'C12AbsMax': max(max(abs(v) for v in consts.C12.values()) for consts in all_consts),
                              'symbolBounds': _symbol_bounds_summary(N_list[-1])}
    if len(N_list) < 3:
        logger.warning(f"renorm scaling fits need at least 3 resolutions, got {N_list}")
        return StudyResult(config, [scaling, constants], summary)
    ratios = [b / a for a, b in zip(scaling.column('eps_C0'), scaling.column('eps_C0')[1:])]
    differences = [abs(b - a) for a, b in zip(scaling.column('C11_over_log'), scaling.column('C11_over_log')[1:])]
    lower, upper = EPS_C0_RATIO_BOUNDS
    summary.update({
        'epsC0Ratios': ratios,
        'epsC0RatiosWithinBounds': all(lower <= ratio <= upper for ratio in ratios),
        'C11OverLogDifferences': differences,
        'C11OverLogDifferencesShrinking': _strictly_decreasing(differences),
        'C0Fit': _fit_or_none([(1.0 / consts.eps, consts.C0) for consts in all_consts]),
        'C11Fit': _fit_or_none([(math.log(1.0 / consts.eps), consts.C11) for consts in all_consts])
    })
    logger.info(f"--- Renorm scaling ---\n"
                f"- eps C0 ratios: {', '.join(f'{r:.4f}' for r in ratios)}\n"
                f"- C11/log(1/eps) differences: {', '.join(f'{d:.4g}' for d in differences)}\n"
                f"- max |C12|: {summary['C12AbsMax']:.4g}\n")
    return StudyResult(config, [scaling, constants], summary)

def _ou_replica(task: Tuple[int, int, int, float, List[Tuple[int, int, int]]]) -> np.ndarray:
    N, seed, replica, lag, modes = task
    start = ou_sample_stationary(GridSpec(N), Variant.LATTICE, seed, replica)
    later = ou_transition(start, lag)
    variances = [abs(start.coefficient(k)) ** 2 for k in modes]
    covariances = [(later.coefficient(k) * np.conj(start.coefficient(k))).real for k in modes]
    second_moment = float(np.mean(np.asarray(dft_inverse(start.to_spectral(), start.grid).values) ** 2))
    return np.array(variances + covariances + [second_moment])

def ou_law_study(config: StudyConfig) -> StudyResult:
    """Stationary variance V0(k), lag-T covariance e^{-lambda T} V0(k) and E[u1(x)^2] = C0 against Monte Carlo."""
    table = StudyTable('ou_law', ['N', 'quantity', 'mode', 'estimate', 'expected', 'stderr', 'z_score'])
    lag = config.T
    for N in config.N_list:
        params = SymbolParams(N)
        modes = [k for k in OU_LAW_MODES if max(k) <= N] + ([(N, 0, 0)] if N > 1 else [])
        tasks = [(N, config.seed, replica, lag, modes) for replica in range(config.samples)]
        samples = np.array(map_ordered(_ou_replica, tasks, config.threads))
        lam, v0 = eigenvalues(params, N), stationary_variance(params, N)
        expected = [float(v0[k[0] + N, k[1] + N, k[2] + N]) for k in modes]
        expected += [float(np.exp(-lag * lam[k[0] + N, k[1] + N, k[2] + N]) * v0[k[0] + N, k[1] + N, k[2] + N]) for k in modes]
        expected.append(float(np.sum(v0)) / 8.0)
        labels = [('variance', k) for k in modes] + [('lag_covariance', k) for k in modes] + [('second_moment', None)]
        for column, ((quantity, k), target) in enumerate(zip(labels, expected)):
            mean, stderr = _mean_stderr(samples[:, column])
            z_score = (mean - target) / stderr if 0 < stderr < math.inf else 0.0
            table.append([N, quantity, ' '.join(str(c) for c in k) if k is not None else '-', mean, target, stderr, z_score])
    z_scores = [abs(z) for z in table.column('z_score')]
    summary = {'lag': lag, 'maxAbsZScore': max(z_scores), 'withinThreeStderr': all(z <= 3.0 for z in z_scores)}
    logger.info(f"--- OU law ---\n- max |z|: {summary['maxAbsZScore']:.3f} over {len(table)} checks\n")
    return StudyResult(config, [table], summary)

def _target_exponent(block_object: BlockObject, kappa: float) -> float:
    if block_object == BlockObject.U1_DIFF:
        return kappa + 1.0
    if block_object == BlockObject.WICK2_DIFF:
        return kappa + 2.0
    return kappa - 1.0

def block_variance_study(config: StudyConfig) -> StudyResult:
    """Block second moments of a coupled difference object over N_list and every active block.

    Reports per-N fitted growth in 2^q against the target exponent and per-block decay rates in eps.
    """
    t = config.t_probe
    if t > config.T:
        raise InvalidParameterException("t_probe must not exceed T", {'t_probe': t, 'T': config.T})
    block_object = config.block_object
    table = StudyTable('blocks', ['object', 'N', 'q', 't', 'estimate', 'stderr', 'point_estimate', 'samples'])
    by_N: Dict[int, Dict[int, float]] = {}
    for N in config.N_list:
        band = max(N, config.N_ref) * (2 if block_object == BlockObject.WICK2_DIFF else 1)
        part = build_dyadic_partition(max(N, config.N_ref))
        qs = [q for q in part.blocks(band) if q <= part.jmax]
        for estimate in block_variances(block_object, qs, t, config, N):
            table.append(estimate.to_row())
            by_N.setdefault(N, {})[estimate.q] = estimate.estimate
    target = _target_exponent(block_object, config.analysis.kappa)
    q_slopes = {}
    for N, estimates in by_N.items():
        fit = _fit_or_none([(2.0 ** q, value) for q, value in estimates.items() if q >= 0])
        q_slopes[str(N)] = fit
    eps_rates, decreasing = {}, {}
    all_qs = sorted({q for estimates in by_N.values() for q in estimates})
    N_sorted = sorted(by_N)
    for q in all_qs:
        values = [by_N[N][q] for N in N_sorted if q in by_N[N]]
        eps_rates[str(q)] = _fit_or_none([(2.0 / (2 * N + 1), by_N[N][q]) for N in N_sorted if q in by_N[N]])
        decreasing[str(q)] = _strictly_decreasing(values)
    summary = {
        'object': block_object.value,
        't': t,
        'targetExponent': target,
        'qSlopes': q_slopes,
        'qSlopesWithinTarget': all(fit is None or fit['slope'] <= target + Q_SLOPE_TOLERANCE for fit in q_slopes.values()),
        'epsRates': eps_rates,
        'decreasingInN': decreasing
    }
    slopes = ', '.join(f"N={N}: {fit['slope']:.3f}" if fit else f"N={N}: -" for N, fit in q_slopes.items())
    logger.info(f"--- Block variance ---\n"
                f"- object: {block_object.value}, t: {t:g}, target exponent: {target:g}\n"
                f"- q slopes: {slopes}\n")
    return StudyResult(config, [table], summary)

def _enhanced_replica(task: Tuple[int, StudyConfig, int, RenormConstants, Correctors]) -> np.ndarray:
    N, config, replica, consts, corr = task
    delta = config.diagnostic_delta
    gamma = config.analysis.gamma
    part = build_dyadic_partition(N)
    run = _run_config(config, N)
    start = ou_sample_stationary(GridSpec(N), Variant.LATTICE, config.seed, replica, coupling_band(config))

    def norm(spec, alpha):
        return holder_norm(spec, alpha, part, config.oversample)

    try:
        phi_path, ou_states = run_lattice_path(run, config.seed, replica, consts, start)
    except InvalidDataException:
        phi_path = None
        ou_states = ou_path(start, int(round(config.T / config.dt)), config.dt)
    u2_path = compute_u2(ou_states, config.T, config.dt, consts.C0)
    wick2_path = [wick_square(state, consts.C0) for state in ou_states]
    K = compute_K(wick2_path, config.T, config.dt, SymbolParams(N))
    resonant = resonant_renormalized(K, wick2_path[-1], config.T, N, consts, corr, part)
    raw = paraproduct(K, wick2_path[-1], ParaproductKind.RES, part)
    if phi_path is None:
        u3_norm = math.nan
    else:
        u3_norm = decompose_remainder(phi_path[-1:], ou_states[-1:], u2_path[-1:], gamma, part, config.oversample).norms[-1]
    u1 = ou_states[-1].to_spectral()
    return np.array([
        norm(u1, -0.5 - delta / 2),
        norm(wick2_path[-1], -1.0 - delta / 2),
        norm(u2_path[-1], 0.5 - delta),
        norm(resonant, -delta),
        norm(raw, -delta),
        u3_norm,
        norm(u1, gamma)
    ])

def enhanced_norms_study(config: StudyConfig) -> StudyResult:
    """Medians of the enhanced-noise norm collection at time T, with the unrenormalised resonant product alongside.

    The renormalised resonant product stays of order one in N while the raw one grows with C11;
    the remainder u3 = Ext Phi - u1 - u2 stays bounded while u1 does not.
    """
    runs = StudyTable('enhanced_norms', ['N', 'replica'] + ENHANCED_COLUMNS)
    medians = StudyTable('enhanced_medians', ['N', 'C11'] + ENHANCED_COLUMNS)
    median_by_N: Dict[int, List[float]] = {}
    c11_by_N: Dict[int, float] = {}
    for N in config.N_list:
        consts = compute_renorm_constants(N, galerkin_symbol_factor=config.galerkin_symbol_factor)
        corr = compute_correctors(config.T, N, continuum_factor=config.galerkin_symbol_factor)
        tasks = [(N, config, replica, consts, corr) for replica in range(config.samples)]
        values = np.array(map_ordered(_enhanced_replica, tasks, config.threads))
        for replica, row in enumerate(values):
            runs.append([N, replica] + row.tolist())
        median_by_N[N] = [SampleSummary.of(column[np.isfinite(column)]).median for column in values.T]
        c11_by_N[N] = consts.C11
        medians.append([N, consts.C11] + median_by_N[N])
    N_sorted = sorted(median_by_N)
    first, last = N_sorted[0], N_sorted[-1]
    raw_index, resonant_index = ENHANCED_COLUMNS.index('resonant_raw'), ENHANCED_COLUMNS.index('resonant')
    raw_growth = median_by_N[last][raw_index] - median_by_N[first][raw_index]
    c11_growth = c11_by_N[last] - c11_by_N[first]
    base = median_by_N[first][resonant_index]
    ratio = median_by_N[last][resonant_index] / base if base > 0 else math.nan
    summary = {
        'delta': config.diagnostic_delta,
        'gamma': config.analysis.gamma,
        'rawResonantGrowth': raw_growth,
        'C11Growth': c11_growth,
        'rawGrowthAtLeastHalfC11Growth': bool(raw_growth >= 0.5 * c11_growth),
        'renormalisedResonantRatio': ratio,
        'renormalisedResonantStable': bool(math.isfinite(ratio) and ratio <= RESONANT_STABILITY_FACTOR)
    }
    logger.info(f"--- Enhanced norms ---\n"
                f"- raw resonant growth: {raw_growth:.4g} (C11 growth {c11_growth:.4g})\n"
                f"- renormalised resonant ratio N={last}/N={first}: {summary['renormalisedResonantRatio']:.4g} (stable: {summary['renormalisedResonantStable']})\n")
    return StudyResult(config, [medians, runs], summary)

def _convergence_replica(task: Tuple[StudyConfig, int, Dict[int, RenormConstants]]) -> List[CoupledRun]:
    config, replica, consts = task
    N_list = sorted(set(config.N_list))
    return run_coupled_sweep(_run_config(config, N_list[0]), N_list, config.seed, replica, consts, consts[config.N_ref])

def _all_constants(config: StudyConfig) -> Dict[int, RenormConstants]:
    return {N: compute_renorm_constants(N, galerkin_symbol_factor=config.galerkin_symbol_factor) for N in sorted(set(config.N_list + [config.N_ref]))}

def convergence_study(config: StudyConfig) -> StudyResult:
    """sup_{t <= tau_L ^ T} ||Ext Phi^eps - Phi_ref||_{-z} over `samples` replicas with common random numbers across N.

    Errors are conditional on [0, tau_L ^ T]; the blow-up fraction is reported separately.

    Raises:
        InvalidParameterException: If N_ref < max(N_list).
    """
    if config.N_ref < max(config.N_list):
        raise InvalidParameterException("The reference must resolve every N", {'N_list': config.N_list, 'N_ref': config.N_ref})
    N_list = sorted(set(config.N_list))
    consts = _all_constants(config)
    tasks = [(config, replica, consts) for replica in range(config.samples)]
    sweeps = map_ordered(_convergence_replica, tasks, config.threads)
    runs = StudyTable('convergence_runs', ['N', 'replica', 'sup_error', 'stop_time', 'status', 'tail_energy'])
    curves = StudyTable('error_curves', ['N', 'replica', 't', 'e'])
    table = StudyTable('convergence', ['N', 'eps', 'median', 'lower_quartile', 'upper_quartile', 'blowup_fraction', 'max_tail_energy', 'samples'])
    for index, N in enumerate(N_list):
        outcomes = [sweep[index] for sweep in sweeps]
        for run in outcomes:
            runs.append([N, run.replica, run.sup_error, run.stop_time, run.status.value, run.tail_energy])
            for t, e in run.error_curve:
                curves.append([N, run.replica, t, e])
        errors = SampleSummary.of([run.sup_error for run in outcomes])
        tail = max(run.tail_energy for run in outcomes)
        if tail > TAIL_ENERGY_WARNING:
            logger.warning(f"reference top-shell energy fraction {tail:.3g} at N={N}; raise N_ref")
        table.append([N, 2.0 / (2 * N + 1), errors.median, errors.lower_quartile, errors.upper_quartile,
                      sum(run.blown_up for run in outcomes) / len(outcomes), tail, len(outcomes)])
    medians = table.column('median')
    summary = {
        'medians': dict(zip((str(N) for N in N_list), medians)),
        'strictlyDecreasing': _strictly_decreasing(medians),
        'rateFit': _fit_or_none([(2.0 / (2 * N + 1), median) for N, median in zip(N_list, medians)]),
        'blowupFraction': dict(zip((str(N) for N in N_list), table.column('blowup_fraction')))
    }
    logger.info(f"--- Convergence ---\n"
                f"- medians: {', '.join(f'N={N}: {m:.4g}' for N, m in zip(N_list, medians))}\n"
                f"- strictly decreasing: {summary['strictlyDecreasing']}\n")
    return StudyResult(config, [table, runs, curves], summary)

def simulate_study(config: StudyConfig) -> StudyResult:
    """One coupled sweep (replica 0) with full trajectories and error curves."""
    if config.reference_variant == Variant.LATTICE and config.N_ref < max(config.N_list):
        raise InvalidParameterException("A lattice reference needs N_ref >= N", {'N_list': config.N_list, 'N_ref': config.N_ref})
    N_list = sorted(set(config.N_list))
    consts = _all_constants(config)
    outcomes = run_coupled_sweep(_run_config(config, N_list[0]), N_list, config.seed, 0, consts, consts[config.N_ref])
    trajectories = StudyTable('trajectories', ['N'] + TrajectoryRecord.columns())
    curves = StudyTable('error_curve', ['N', 't', 'e'])
    summary_rows = StudyTable('runs', ['N', 'stop_time', 'status', 'sup_error', 'tail_energy'])
    for run in outcomes:
        for record in run.lattice + run.reference:
            trajectories.append([run.N] + record.to_row())
        for t, e in run.error_curve:
            curves.append([run.N, t, e])
        summary_rows.append([run.N, run.stop_time, run.status.value, run.sup_error, run.tail_energy])
    return StudyResult(config, [summary_rows, trajectories, curves], {'runs': [run.to_json_object() for run in outcomes]})

STUDIES = {
    StudyKind.RENORM_SCALING: renorm_scaling_study,
    StudyKind.OU_LAW: ou_law_study,
    StudyKind.BLOCK_VARIANCE: block_variance_study,
    StudyKind.ENHANCED_NORMS: enhanced_norms_study,
    StudyKind.CONVERGE: convergence_study,
    StudyKind.SIMULATE: simulate_study
}

def run_study(config: StudyConfig) -> StudyResult:
    """Validate the config and dispatch to its study driver."""
    config.check()
    logger.info(f"--- Study {config.study.value} ---\n"
                f"- N_list: {config.N_list}, N_ref: {config.N_ref}\n"
                f"- T: {config.T:g}, dt: {config.dt:g}, samples: {config.samples}, seed: {config.seed}\n")
    return STUDIES[config.study](config)

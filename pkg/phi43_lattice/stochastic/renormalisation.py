"""Renormalisation constants C0, C11, C12 and the correctors phi1, phi2.

The pair sums 2^-5 sum_{k1,k2} V_0(k1) V_0(k2) e^{-t Lambda} / Lambda, with
Lambda = lambda_{k1} + lambda_{k2} + lambda_m, are evaluated two ways:

  * directly over all mode pairs (numba kernel, O(N^6)), the oracle;
  * as int_t^inf I(sigma) dsigma where I(sigma) collects, for every s = k1 + k2,
    (g_sigma * g_sigma)(s) e^{-sigma lambda_m(s)} with g_sigma = e^{-sigma lambda} V_0,
    the convolution done by FFT.

On the lattice m is the fold of -s onto the band and the fold triple labels the sum
(0,0,0 gives C11, the others C12). The galerkin sum keeps only |s|_inf <= N with m = -s,
the continuum limit keeps every s.
"""
from enum import IntEnum
import logging
import math
from typing import Optional

import numba
import numpy as np
from scipy import signal, special

from ..errors import InvalidParameterException, QuadratureFailureException
from ..model.renorm import Correctors, QuadratureSpec, RenormConstants
from ..model.symbol import Cutoff, SymbolParams, Variant
from ..operators import eigenvalues, stationary_variance
from .. import utils


logger = logging.getLogger(__name__)

PAIR_PREFACTOR = 2.0 ** -5

CENTER_LABEL = 13
"""Flat index of the triple (0,0,0) in the 3x3x3 label cube."""

CONTINUUM_TAIL_EXPONENT = 28.0
"""The continuum sum drops modes with e^{-t c |k|^2} below e^{-28}."""

MAX_CONTINUUM_BAND = 64


class PairMode(IntEnum):
    FOLDED = 0
    """Lattice: m = fold of -(k1 + k2), labelled by the fold triple."""
    TRUNCATED = 1
    """Galerkin: only |k1 + k2|_inf <= N, m = -(k1 + k2)."""
    FULL = 2
    """Continuum: every k1 + k2, m = -(k1 + k2)."""


class SumPath(IntEnum):
    FFT = 0
    DIRECT = 1


def _triple_index(triple: utils.Triple) -> int:
    return 9 * (triple[0] + 1) + 3 * (triple[1] + 1) + (triple[2] + 1)

def _check_triple(triple: utils.Triple) -> None:
    if tuple(triple) == (0, 0, 0) or any(i not in (-1, 0, 1) for i in triple):
        raise InvalidParameterException("C12 triple must be a nonzero element of {-1,0,1}^3", {'triple': list(triple)})

def compute_C0(N: int, variant: Variant = Variant.LATTICE, continuum_factor: float = 1.0) -> float:
    """C0 = 2^-3 sum_{0 < |k|_inf <= N} 1 / (2 lambda_k).

    Args:
        N (int): Lattice cut.
        variant (Variant, optional): Lattice (C0) or galerkin (C0_bar). Defaults to Variant.LATTICE.
        continuum_factor (float, optional): c of the galerkin symbol. Defaults to 1.0.

    Returns:
        float: The constant.
    """
    if N < 1:
        raise InvalidParameterException("Lattice cut N must be positive", {'N': N})
    params = SymbolParams(N, variant, Cutoff.SHARP, continuum_factor)
    return float(np.sum(stationary_variance(params, N)) / 8.0)


@numba.njit(cache=True)
def _pair_sums_kernel(v0: np.ndarray, lam: np.ndarray, band: int, lam_band: int, N: int, mode: int, t: float) -> np.ndarray:
    out = np.zeros((3, 3, 3))
    side = 2 * band + 1
    modulus = 2 * N + 1
    for a1 in range(side):
        for b1 in range(side):
            for c1 in range(side):
                w1 = v0[a1, b1, c1]
                if w1 == 0.0:
                    continue
                l1 = lam[a1 - band + lam_band, b1 - band + lam_band, c1 - band + lam_band]
                for a2 in range(side):
                    for b2 in range(side):
                        for c2 in range(side):
                            w2 = v0[a2, b2, c2]
                            if w2 == 0.0:
                                continue
                            l2 = lam[a2 - band + lam_band, b2 - band + lam_band, c2 - band + lam_band]
                            m1 = -(a1 + a2 - 2 * band)
                            m2 = -(b1 + b2 - 2 * band)
                            m3 = -(c1 + c2 - 2 * band)
                            i1 = 0
                            i2 = 0
                            i3 = 0
                            if mode == 0:
                                if m1 > N:
                                    m1 -= modulus
                                    i1 = 1
                                elif m1 < -N:
                                    m1 += modulus
                                    i1 = -1
                                if m2 > N:
                                    m2 -= modulus
                                    i2 = 1
                                elif m2 < -N:
                                    m2 += modulus
                                    i2 = -1
                                if m3 > N:
                                    m3 -= modulus
                                    i3 = 1
                                elif m3 < -N:
                                    m3 += modulus
                                    i3 = -1
                            elif mode == 1:
                                if abs(m1) > N or abs(m2) > N or abs(m3) > N:
                                    continue
                            total = l1 + l2 + lam[m1 + lam_band, m2 + lam_band, m3 + lam_band]
                            out[i1 + 1, i2 + 1, i3 + 1] += w1 * w2 * np.exp(-t * total) / total
    return out


class _PairPlan:
    """Precomputed tables of one pair sum: weights on band B and lambda_m, labels over s in band 2B."""

    def __init__(self, params: SymbolParams, mode: PairMode, band: int) -> None:
        self.params = params
        self.mode = mode
        self.band = band
        self.N = params.N
        self.lam = np.asarray(eigenvalues(params, band))
        self.v0 = stationary_variance(params, band)
        if mode == PairMode.FULL:
            # no indicator: every mode up to the cutoff band carries V_0 = 1/(2 lambda)
            with np.errstate(divide='ignore'):
                self.v0 = np.where(self.lam > 0, 0.5 / np.where(self.lam > 0, self.lam, 1.0), 0.0)
        s = utils.frequency_axis(2 * band)
        if mode == PairMode.FOLDED:
            modulus = 2 * self.N + 1
            fold = np.where(-s > self.N, 1, np.where(-s < -self.N, -1, 0))
            m = -s - modulus * fold
            lam_N = np.asarray(eigenvalues(params, self.N))
            index = m + self.N
            self.lam_m = lam_N[np.ix_(index, index, index)]
            self.labels = (9 * (fold[:, None, None] + 1) + 3 * (fold[None, :, None] + 1) + (fold[None, None, :] + 1)).astype(np.intp)
            self.labels = np.broadcast_to(self.labels, self.lam_m.shape).ravel()
            self.valid = np.ones(self.lam_m.shape, dtype=bool)
        else:
            self.lam_m = np.asarray(eigenvalues(params, 2 * band))
            self.labels = np.full(self.lam_m.size, CENTER_LABEL, dtype=np.intp)
            if mode == PairMode.TRUNCATED:
                self.valid = np.broadcast_to(utils.frequency_sup_norm(2 * band) <= self.N, self.lam_m.shape)
            else:
                self.valid = np.ones(self.lam_m.shape, dtype=bool)
        support = self.v0 > 0
        lam_support = self.lam[support]
        self.lambda_min = 2.0 * float(lam_support.min())
        self.lambda_max = 2.0 * float(lam_support.max()) + float(self.lam_m[self.valid].max())

    def integrand(self, sigma: float) -> np.ndarray:
        """I(sigma) per label (27 entries)."""
        g = np.exp(-sigma * self.lam) * self.v0
        gg = signal.fftconvolve(g, g)
        weights = np.where(self.valid, gg * np.exp(-sigma * self.lam_m), 0.0)
        return PAIR_PREFACTOR * np.bincount(self.labels, weights=weights.ravel(), minlength=27)

    def direct(self, t: float) -> np.ndarray:
        """Brute-force pair sum with weight e^{-t Lambda} / Lambda, per label."""
        if self.mode == PairMode.FOLDED:
            lam, lam_band = np.ascontiguousarray(np.asarray(eigenvalues(self.params, self.band))), self.band
        else:
            lam, lam_band = np.ascontiguousarray(np.asarray(eigenvalues(self.params, 2 * self.band))), 2 * self.band
        out = _pair_sums_kernel(np.ascontiguousarray(self.v0), lam, self.band, lam_band, self.N, int(self.mode), float(t))
        return PAIR_PREFACTOR * out.ravel()


def _integrate(plan: _PairPlan, lower: float, quad: QuadratureSpec) -> np.ndarray:
    """int_lower^inf I(sigma) dsigma per label, composite Gauss-Legendre in log(sigma - lower)."""
    s_min = quad.small_sigma / plan.lambda_max
    s_max = quad.large_sigma / plan.lambda_min
    tau_low, tau_high = math.log(s_min), math.log(s_max)
    panels = max(1, math.ceil((tau_high - tau_low) / quad.panel_width))
    edges = np.linspace(tau_low, tau_high, panels + 1)
    # int_0^{s_min} by the trapezoid rule, the integrand is linear there to O(s_min^2 Lambda^2)
    head = 0.5 * s_min * (plan.integrand(lower) + plan.integrand(lower + s_min))
    previous: Optional[np.ndarray] = None
    nodes = quad.initial_nodes
    for level in range(quad.max_levels):
        x, w = special.roots_legendre(nodes)
        total = head.copy()
        for a, b in zip(edges[:-1], edges[1:]):
            half = 0.5 * (b - a)
            tau = 0.5 * (a + b) + half * x
            for tau_i, w_i in zip(tau, w):
                s = math.exp(tau_i)
                total += half * w_i * s * plan.integrand(lower + s)
        if previous is not None:
            scale = np.maximum(np.abs(total), 1e-300)
            change = float(np.max(np.abs(total - previous) / scale))
            logger.debug(f"sigma quadrature N={plan.N} mode={plan.mode.name} lower={lower:g}: {nodes} nodes/panel, change={change:.3e}")
            if change < quad.tolerance:
                return total
        previous = total
        nodes *= 2
    raise QuadratureFailureException("Sigma quadrature did not converge", {
        'N': plan.N, 'mode': plan.mode.name, 'lower': lower, 'quadrature': quad.to_json_object()
    })

def pair_sums(N: int, mode: PairMode, t: float = 0.0,
              quad: Optional[QuadratureSpec] = None,
              path: SumPath = SumPath.FFT,
              continuum_factor: float = 1.0,
              band: Optional[int] = None) -> np.ndarray:
    """The 27 labelled pair sums 2^-5 sum V_0 V_0 e^{-t Lambda} / Lambda.

    Args:
        N (int): Lattice cut.
        mode (PairMode): Folded lattice sum, truncated galerkin sum or continuum sum.
        t (float, optional): Tail time, 0 for the constants. Defaults to 0.0.
        quad (Optional[QuadratureSpec], optional): Sigma quadrature of the FFT path.
        path (SumPath, optional): FFT or direct. Defaults to SumPath.FFT.
        continuum_factor (float, optional): c of the galerkin symbol. Defaults to 1.0.
        band (Optional[int], optional): Mode band of k1, k2 (continuum sums only). Defaults to N.

    Raises:
        QuadratureFailureException: If the sigma quadrature does not converge.

    Returns:
        np.ndarray: Flat array of 27 sums indexed by 9(i1+1) + 3(i2+1) + (i3+1).
    """
    if N < 1:
        raise InvalidParameterException("Lattice cut N must be positive", {'N': N})
    variant = Variant.LATTICE if mode == PairMode.FOLDED else Variant.GALERKIN
    plan = _PairPlan(SymbolParams(N, variant, Cutoff.SHARP, continuum_factor), mode, N if band is None else band)
    if path == SumPath.DIRECT:
        return plan.direct(t)
    return _integrate(plan, t, quad if quad is not None else QuadratureSpec())

def compute_C11(N: int, variant: Variant = Variant.LATTICE,
                quad: Optional[QuadratureSpec] = None,
                path: SumPath = SumPath.FFT,
                continuum_factor: float = 1.0) -> float:
    """C11 = 2^-5 sum V_0(k1) V_0(k2) / (lambda_{k1} + lambda_{k2} + lambda_{k12}) over |k1|,|k2|,|k12| <= N.

    Raises:
        QuadratureFailureException: If the sigma quadrature does not converge.
    """
    mode = PairMode.FOLDED if variant == Variant.LATTICE else PairMode.TRUNCATED
    return float(pair_sums(N, mode, 0.0, quad, path, continuum_factor)[CENTER_LABEL])

def compute_C12(N: int, triple: utils.Triple,
                quad: Optional[QuadratureSpec] = None,
                path: SumPath = SumPath.FFT) -> float:
    """C12 of one fold triple: the pair sum over k12 folded by -(2N+1)(i1,i2,i3).

    Raises:
        InvalidParameterException: If the triple is zero or outside {-1,0,1}^3.
        QuadratureFailureException: If the sigma quadrature does not converge.
    """
    _check_triple(triple)
    return float(pair_sums(N, PairMode.FOLDED, 0.0, quad, path)[_triple_index(triple)])

def compute_renorm_constants(N: int,
                             quad: Optional[QuadratureSpec] = None,
                             path: SumPath = SumPath.FFT,
                             galerkin_symbol_factor: float = 1.0) -> RenormConstants:
    """Every constant of resolution N; the 27 lattice sums come from a single sigma loop."""
    folded = pair_sums(N, PairMode.FOLDED, 0.0, quad, path)
    truncated = pair_sums(N, PairMode.TRUNCATED, 0.0, quad, path, galerkin_symbol_factor)
    consts = RenormConstants(
        N,
        compute_C0(N, Variant.LATTICE),
        compute_C0(N, Variant.GALERKIN, galerkin_symbol_factor),
        float(folded[CENTER_LABEL]),
        float(truncated[CENTER_LABEL]),
        {triple: float(folded[_triple_index(triple)]) for triple in utils.nonzero_triples()},
        galerkin_symbol_factor
    )
    logger.info(f"--- Renormalisation constants ---\n"
                f"- N: {N} (eps = 2/{2 * N + 1})\n"
                f"- C0: {consts.C0:.10g}, C0_bar: {consts.C0_bar:.10g}\n"
                f"- C11: {consts.C11:.10g}, C11_bar: {consts.C11_bar:.10g}\n"
                f"- C1: {consts.C1:.10g}, mass shift: {consts.mass_shift:.10g}\n")
    return consts

def continuum_band(t: float, continuum_factor: float) -> int:
    """Mode cutoff of the continuum corrector: e^{-t c B^2} <= e^{-28}."""
    band = math.ceil(math.sqrt(CONTINUUM_TAIL_EXPONENT / (continuum_factor * t)))
    if band > MAX_CONTINUUM_BAND:
        logger.warning(f"continuum corrector band {band} capped at {MAX_CONTINUUM_BAND} (t={t:g})")
        band = MAX_CONTINUUM_BAND
    return max(band, 1)

def compute_correctors(t: float, N: int,
                       quad: Optional[QuadratureSpec] = None,
                       continuum_factor: float = math.pi ** 2,
                       path: SumPath = SumPath.FFT) -> Correctors:
    """phi1^eps(t), phi2^eps(t) per triple, phi1_bar(t) and the continuum phi1(t).

    Each corrector is minus the tail int_t^inf of its constant's sigma integrand, so
    phi1^eps(t) + C11 = 2 I_t^3 >= 0.

    Args:
        t (float): Time, positive.
        N (int): Lattice cut.
        quad (Optional[QuadratureSpec], optional): Sigma quadrature.
        continuum_factor (float, optional): c of the galerkin and continuum symbol. Defaults to pi^2.
        path (SumPath, optional): FFT or direct evaluation of the lattice and galerkin tails.

    Raises:
        InvalidParameterException: If t <= 0.

    Returns:
        Correctors: Values at t.
    """
    if t <= 0:
        raise InvalidParameterException("Correctors need t > 0", {'t': t})
    folded = pair_sums(N, PairMode.FOLDED, t, quad, path)
    truncated = pair_sums(N, PairMode.TRUNCATED, t, quad, path, continuum_factor)
    limit = pair_sums(N, PairMode.FULL, t, quad, SumPath.FFT, continuum_factor, continuum_band(t, continuum_factor))
    return Correctors(
        t,
        N,
        -float(folded[CENTER_LABEL]),
        -float(limit[CENTER_LABEL]),
        -float(truncated[CENTER_LABEL]),
        {triple: -float(folded[_triple_index(triple)]) for triple in utils.nonzero_triples()}
    )

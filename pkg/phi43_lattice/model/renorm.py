from __future__ import annotations # Allow referencing enclosing class in typings
from typing import Any, Dict, List

from .. import utils


class QuadratureSpec:
    """Composite Gauss-Legendre rule in log(sigma) for integrals int_lower^inf I(sigma) dsigma.

    The integrand is a positive sum of exponentials e^{-sigma Lambda}; the rule covers
    sigma - lower in [small_sigma / Lambda_max, large_sigma / Lambda_min] with panels of
    width `panel_width` in log(sigma), doubling the node count per panel until the
    relative change between levels drops below `tolerance`.
    """

    tolerance: float

    initial_nodes: int

    max_levels: int

    panel_width: float

    small_sigma: float

    large_sigma: float

    def __init__(self, tolerance: float = 1e-8,
                       initial_nodes: int = 8,
                       max_levels: int = 4,
                       panel_width: float = 1.0,
                       small_sigma: float = 1e-6,
                       large_sigma: float = 40.0) -> None:
        self.tolerance = tolerance
        self.initial_nodes = initial_nodes
        self.max_levels = max_levels
        self.panel_width = panel_width
        self.small_sigma = small_sigma
        self.large_sigma = large_sigma

    def to_json_object(self) -> Dict[str, Any]:
        return {
            'tolerance': self.tolerance,
            'initialNodes': self.initial_nodes,
            'maxLevels': self.max_levels,
            'panelWidth': self.panel_width,
            'smallSigma': self.small_sigma,
            'largeSigma': self.large_sigma
        }


class RenormConstants:
    """Renormalisation constants of one resolution N."""

    N: int

    C0: float
    """2^-3 sum V_0(k), lattice symbol."""

    C0_bar: float
    """Same sum with the galerkin symbol."""

    C11: float

    C11_bar: float

    C12: Dict[utils.Triple, float]
    """The 26 aliasing constants keyed by (i1, i2, i3)."""

    galerkin_symbol_factor: float
    """c of the galerkin symbol c|k|^2 the barred constants were computed with."""

    def __init__(self, N: int, C0: float, C0_bar: float, C11: float, C11_bar: float, C12: Dict[utils.Triple, float], galerkin_symbol_factor: float = 1.0) -> None:
        self.N = N
        self.C0 = C0
        self.C0_bar = C0_bar
        self.C11 = C11
        self.C11_bar = C11_bar
        self.C12 = dict(C12)
        self.galerkin_symbol_factor = galerkin_symbol_factor

    @property
    def eps(self) -> float:
        return 2.0 / (2 * self.N + 1)

    @property
    def C1(self) -> float:
        return self.C11 + sum(self.C12[triple] for triple in utils.nonzero_triples())

    @property
    def C1_bar(self) -> float:
        """The reference equation has no aliasing, so C1_bar = C11_bar."""
        return self.C11_bar

    @property
    def mass_shift(self) -> float:
        """3 C0 - 9 C1, the linear drift coefficient of the lattice equation."""
        return 3.0 * self.C0 - 9.0 * self.C1

    @property
    def mass_shift_bar(self) -> float:
        return 3.0 * self.C0_bar - 9.0 * self.C1_bar

    @classmethod
    def columns(cls) -> List[str]:
        return ['N', 'eps', 'C0', 'C0_bar', 'C11', 'C11_bar'] + [utils.triple_label(triple) for triple in utils.nonzero_triples()] + ['C1', 'mass_shift']

    def to_row(self) -> List[float]:
        return [self.N, self.eps, self.C0, self.C0_bar, self.C11, self.C11_bar] + [self.C12[triple] for triple in utils.nonzero_triples()] + [self.C1, self.mass_shift]

    @classmethod
    def from_row(cls, row: Dict[str, str], galerkin_symbol_factor: float = 1.0) -> RenormConstants:
        return cls(
            int(row['N']),
            float(row['C0']),
            float(row['C0_bar']),
            float(row['C11']),
            float(row['C11_bar']),
            {triple: float(row[utils.triple_label(triple)]) for triple in utils.nonzero_triples()},
            galerkin_symbol_factor
        )

    def to_json_object(self) -> Dict[str, Any]:
        return {
            'N': self.N,
            'eps': self.eps,
            'C0': self.C0,
            'C0Bar': self.C0_bar,
            'C11': self.C11,
            'C11Bar': self.C11_bar,
            'C12': {utils.triple_label(triple): value for triple, value in self.C12.items()},
            'C1': self.C1,
            'massShift': self.mass_shift,
            'galerkinSymbolFactor': self.galerkin_symbol_factor
        }

    def __repr__(self) -> str:
        return f"RenormConstants(N={self.N}, C0={self.C0:.6g}, C11={self.C11:.6g}, C1={self.C1:.6g})"


class Correctors:
    """Time-dependent correctors evaluated at one time t > 0.

    phi1 + C11 = 2 I_t^3 is the zeroth chaos of the resonant product at time t.
    """

    t: float

    N: int

    phi1: float
    """Lattice corrector phi1^eps(t) = -2^-5 sum V_0 V_0 e^{-t Lambda} / Lambda."""

    phi1_limit: float
    """Continuum limit phi1(t), no frequency indicator, galerkin symbol."""

    phi1_bar: float
    """Galerkin corrector, same sum with the galerkin symbol and |k12|_inf <= N."""

    phi2: Dict[utils.Triple, float]

    def __init__(self, t: float, N: int, phi1: float, phi1_limit: float, phi1_bar: float, phi2: Dict[utils.Triple, float]) -> None:
        self.t = t
        self.N = N
        self.phi1 = phi1
        self.phi1_limit = phi1_limit
        self.phi1_bar = phi1_bar
        self.phi2 = dict(phi2)

    @property
    def phi(self) -> float:
        """phi1 + sum of phi2 over the 26 triples."""
        return self.phi1 + sum(self.phi2.values())

    def to_json_object(self) -> Dict[str, Any]:
        return {
            't': self.t,
            'N': self.N,
            'phi1': self.phi1,
            'phi1Limit': self.phi1_limit,
            'phi1Bar': self.phi1_bar,
            'phi2': {utils.triple_label(triple): value for triple, value in self.phi2.items()}
        }

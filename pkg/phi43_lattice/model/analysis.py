from __future__ import annotations # Allow referencing enclosing class in typings
import math
from typing import Any, Dict, List

from ..errors import InvalidParameterException


class BesovIndex:
    """Indices of the Besov space B^alpha_{p,q}; p = q = inf gives the Hoelder-Besov norm ||.||_alpha."""

    alpha: float

    p: float

    q: float

    def __init__(self, alpha: float, p: float = math.inf, q: float = math.inf) -> None:
        if not (p >= 1 and q >= 1):
            raise InvalidParameterException("Besov integrability indices must lie in [1, inf]", {'p': p, 'q': q})
        self.alpha = alpha
        self.p = p
        self.q = q

    def __repr__(self) -> str:
        return f"BesovIndex(alpha={self.alpha:g}, p={self.p:g}, q={self.q:g})"


class AnalysisParams:
    """Exponents z, delta, beta, kappa, gamma, rho of the paracontrolled decomposition."""

    z: float
    """Regularity of the solution norm ||.||_{-z}, in (1/2, 2/3)."""

    delta: float

    beta: float

    kappa: float

    gamma: float
    """Regularity at which the remainder u3 is measured."""

    rho: float
    """Time weight t^rho of the corrector convergence."""

    def __init__(self, z: float = 0.6,
                       delta: float = 0.03,
                       beta: float = 0.02,
                       kappa: float = 0.004,
                       gamma: float = 0.04,
                       rho: float = 0.05) -> None:
        self.z = z
        self.delta = delta
        self.beta = beta
        self.kappa = kappa
        self.gamma = gamma
        self.rho = rho

    def violations(self) -> List[str]:
        violated = []
        if not 0.5 < self.z < 2.0 / 3.0:
            violated.append("1/2 < z < 2/3")
        if min(self.delta, self.beta, self.kappa, self.gamma, self.rho) <= 0:
            violated.append("delta, beta, kappa, gamma, rho > 0")
        if not 2 * self.z - 1 >= self.delta:
            violated.append("2z - 1 >= delta")
        if not self.delta > 2 * self.kappa:
            violated.append("delta > 2 kappa")
        if not self.beta > self.delta / 2:
            violated.append("beta > delta/2")
        if not self.beta + self.delta / 2 + self.kappa < self.gamma:
            violated.append("beta + delta/2 + kappa < gamma")
        if not 5 * self.kappa + self.delta / 2 + self.beta + 3 * self.gamma < 2 - 3 * self.z:
            violated.append("5 kappa + delta/2 + beta + 3 gamma < 2 - 3z")
        return violated

    def check(self) -> AnalysisParams:
        """Verify the admissibility inequalities.

        Raises:
            InvalidParameterException: Listing every violated inequality.

        Returns:
            AnalysisParams: self, for chaining.
        """
        violated = self.violations()
        if violated:
            raise InvalidParameterException("Analysis exponents are not admissible", {'violated': violated, 'params': self.to_json_object()})
        return self

    @classmethod
    def from_json_object(cls, json_object: Dict[str, Any]) -> AnalysisParams:
        defaults = cls()
        return cls(
            json_object.get('z', defaults.z),
            json_object.get('delta', defaults.delta),
            json_object.get('beta', defaults.beta),
            json_object.get('kappa', defaults.kappa),
            json_object.get('gamma', defaults.gamma),
            json_object.get('rho', defaults.rho)
        )

    def to_json_object(self) -> Dict[str, Any]:
        return {
            'z': self.z,
            'delta': self.delta,
            'beta': self.beta,
            'kappa': self.kappa,
            'gamma': self.gamma,
            'rho': self.rho
        }

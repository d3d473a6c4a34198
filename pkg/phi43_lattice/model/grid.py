from __future__ import annotations # Allow referencing enclosing class in typings
from fractions import Fraction
from typing import Any, Dict

import numpy as np


class GridSpec:
    """Lattice Lambda_eps = eps Z^3 on the torus [-1,1]^3 with eps = 2/(2N+1)."""

    N: int

    side: int
    """Points per axis, 2N+1."""

    def __init__(self, N: int) -> None:
        self.N = N
        self.side = 2 * N + 1

    @property
    def eps_fraction(self) -> Fraction:
        """The exact spacing 2/(2N+1)."""
        return Fraction(2, self.side)

    @property
    def eps(self) -> float:
        return float(self.eps_fraction)

    def sites(self) -> np.ndarray:
        """Lattice coordinates x = eps*m, m in {-N..N}, along one axis."""
        return self.eps * np.arange(-self.N, self.N + 1)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GridSpec) and other.N == self.N

    def __hash__(self) -> int:
        return hash(self.N)

    def __repr__(self) -> str:
        return f"GridSpec(N={self.N}, eps=2/{self.side})"

    @classmethod
    def from_json_object(cls, json_object: Dict[str, Any]) -> GridSpec:
        return cls(json_object['N'])

    def to_json_object(self) -> Dict[str, Any]:
        return {
            'N': self.N,
            'eps': self.eps,
            'side': self.side
        }

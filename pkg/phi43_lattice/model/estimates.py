from __future__ import annotations # Allow referencing enclosing class in typings
import math
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from scipy import stats

from .study_config import BlockObject


class RateFit:
    """Least squares line through (log x, log y)."""

    slope: float

    intercept: float

    r_squared: float

    stderr: float
    """Standard error of the slope."""

    points: int

    def __init__(self, slope: float, intercept: float, r_squared: float, stderr: float, points: int) -> None:
        self.slope = slope
        self.intercept = intercept
        self.r_squared = r_squared
        self.stderr = stderr
        self.points = points

    def confidence_interval(self, level: float = 0.95) -> Tuple[float, float]:
        """Student-t interval of the slope; unbounded with two points."""
        if self.points <= 2:
            return (-math.inf, math.inf)
        half = float(stats.t.ppf(0.5 + level / 2.0, self.points - 2)) * self.stderr
        return (self.slope - half, self.slope + half)

    def __repr__(self) -> str:
        return f"RateFit(slope={self.slope:.4g}, r2={self.r_squared:.4g}, n={self.points})"

    def to_json_object(self) -> Dict[str, Any]:
        return {
            'slope': self.slope,
            'intercept': self.intercept,
            'rSquared': self.r_squared,
            'stderr': self.stderr,
            'points': self.points
        }


class SampleSummary:
    """Median and quartiles of a Monte Carlo sample."""

    median: float

    lower_quartile: float

    upper_quartile: float

    count: int

    def __init__(self, median: float, lower_quartile: float, upper_quartile: float, count: int) -> None:
        self.median = median
        self.lower_quartile = lower_quartile
        self.upper_quartile = upper_quartile
        self.count = count

    @classmethod
    def of(cls, values: Sequence[float]) -> SampleSummary:
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            return cls(math.nan, math.nan, math.nan, 0)
        q1, median, q3 = np.percentile(values, [25.0, 50.0, 75.0])
        return cls(float(median), float(q1), float(q3), int(values.size))

    @property
    def spread(self) -> float:
        return self.upper_quartile - self.lower_quartile

    def to_json_object(self) -> Dict[str, Any]:
        return {
            'median': self.median,
            'lowerQuartile': self.lower_quartile,
            'upperQuartile': self.upper_quartile,
            'count': self.count
        }


class BlockEstimate:
    """Monte Carlo estimate of E|Delta_q (X^eps - X_ref)(t)(x)|^2."""

    block_object: BlockObject

    N: int

    q: int

    t: float

    estimate: float
    """Mean over replicas of the probe-set average."""

    stderr: float

    point_estimate: float
    """Same estimate at the first probe point x0 alone."""

    samples: int

    def __init__(self, block_object: BlockObject, N: int, q: int, t: float, estimate: float, stderr: float, point_estimate: float, samples: int) -> None:
        self.block_object = block_object
        self.N = N
        self.q = q
        self.t = t
        self.estimate = estimate
        self.stderr = stderr
        self.point_estimate = point_estimate
        self.samples = samples

    @classmethod
    def columns(cls) -> List[str]:
        return ['object', 'N', 'q', 't', 'estimate', 'stderr', 'point_estimate', 'samples']

    def to_row(self) -> List[Any]:
        return [self.block_object.value, self.N, self.q, self.t, self.estimate, self.stderr, self.point_estimate, self.samples]

    def __repr__(self) -> str:
        return f"BlockEstimate({self.block_object.value}, N={self.N}, q={self.q}, {self.estimate:.4g} +- {self.stderr:.2g})"

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from dao_kpi.errors import ArgumentError


@dataclass(frozen=True)
class GroupedSamples:
    """ Ordered (label, values) groups; values are finite floats. """
    groups: Tuple[Tuple[str, np.ndarray], ...]

    def __post_init__(self):
        for label, values in self.groups:
            if not np.all(np.isfinite(values)):
                raise ArgumentError(f'Group {label} contains non-finite values')

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[str, Sequence[float]]]) -> 'GroupedSamples':
        return cls(tuple((str(label), np.asarray(values, dtype=float)) for label, values in pairs))

    @property
    def labels(self) -> List[str]:
        return [label for label, _ in self.groups]

    @property
    def values(self) -> List[np.ndarray]:
        return [values for _, values in self.groups]

    @property
    def sizes(self) -> List[int]:
        return [len(values) for _, values in self.groups]

    @property
    def k(self) -> int:
        return len(self.groups)

    @property
    def N(self) -> int:
        return sum(self.sizes)

    def subset(self, keep: Iterable[str]) -> 'GroupedSamples':
        keep = set(keep)
        return GroupedSamples(tuple(g for g in self.groups if g[0] in keep))


@dataclass(frozen=True)
class TestResult:
    test_name: str
    statistic: float
    p_value: float
    df: Optional[Tuple[float, ...]] = None
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f'{self.test_name}: p-value {self.p_value} outside [0, 1]')

    def to_dict(self) -> Dict[str, Any]:
        return {
            'test_name': self.test_name,
            'statistic': float(self.statistic),
            'p_value': float(self.p_value),
            'df': None if self.df is None else [float(d) for d in self.df],
            'meta': dict(self.meta),
        }


@dataclass(frozen=True)
class BoxStats:
    n: int
    median: float
    q1: float
    q3: float
    iqr: float
    whisker_low: float
    whisker_high: float
    notch_low: float
    notch_high: float
    outliers: Tuple[float, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n': self.n, 'median': self.median, 'q1': self.q1, 'q3': self.q3, 'iqr': self.iqr,
            'whisker_low': self.whisker_low, 'whisker_high': self.whisker_high,
            'notch_low': self.notch_low, 'notch_high': self.notch_high, 'outliers': list(self.outliers),
        }


def clip_p(p: float) -> float:
    """ Keep p-values in [0, 1] against floating-point overshoot. """
    return float(min(1.0, max(0.0, p)))

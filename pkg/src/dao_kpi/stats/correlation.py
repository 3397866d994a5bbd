import numpy as np
import scipy.stats as ss

from dao_kpi.errors import ArgumentError, DegenerateSampleError, InsufficientSampleError
from dao_kpi.stats.data_utils import TestResult, clip_p


def _pair(x, y, test_name: str):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ArgumentError(f'Correlation needs two equal-length vectors, got {x.shape} and {y.shape}')
    if len(x) < 3:
        raise InsufficientSampleError(f'Correlation needs at least 3 pairs, got {len(x)}')
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise DegenerateSampleError(f'{test_name}: constant input')
    return x, y


def _result(test_name: str, statistic: float, p_value: float, n: int) -> TestResult:
    return TestResult(test_name=test_name, statistic=float(np.clip(statistic, -1.0, 1.0)), p_value=clip_p(p_value),
                      df=(n - 2,), meta={'n': n})


def pearson(x, y) -> TestResult:
    x, y = _pair(x, y, 'pearson')
    result = ss.pearsonr(x, y)
    return _result('pearson', result.statistic, result.pvalue, len(x))


def spearman(x, y) -> TestResult:
    """ Pearson correlation of average ranks, t-distribution p-value. """
    x, y = _pair(x, y, 'spearman')
    result = ss.spearmanr(x, y)
    return _result('spearman', result.statistic, result.pvalue, len(x))

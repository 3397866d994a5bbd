"""Shapiro-Wilk W with Royston's coefficient and p-value approximations (algorithm AS R94)."""
import logging
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.stats import norm

from dao_kpi.errors import DegenerateSampleError, InsufficientSampleError
from dao_kpi.stats.data_utils import TestResult, clip_p


MIN_N = 3
MAX_N = 5000

# polynomial coefficients, ascending powers
C1 = (0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056)
C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
C3 = (0.544, -0.39978, 0.025054, -6.714e-4)
C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
C6 = (-0.4803, -0.082676, 0.0030302)
G = (-2.273, 0.459)
SQRTH = 0.70711
PI6 = 1.90985931710274 # 6 / pi
STQR = 1.04719755119660 # pi / 3


@lru_cache(maxsize=64)
def swilk_coefficients(n: int) -> np.ndarray:
    """ Antisymmetric weights a_1..a_n for order statistics, normalized to unit sum of squares. """
    if n < MIN_N:
        raise InsufficientSampleError(f'Shapiro-Wilk needs at least {MIN_N} values, got {n}')
    half = n // 2
    a = np.zeros(n)
    if n == 3:
        a[-1] = SQRTH
    else:
        m = norm.ppf((np.arange(1, half + 1) - 0.375) / (n + 0.25))
        summ2 = 2.0 * np.sum(m ** 2)
        ssumm2 = np.sqrt(summ2)
        rsn = 1.0 / np.sqrt(n)
        a1 = P.polyval(rsn, C1) - m[0] / ssumm2
        w = -m.copy()
        if n > 5:
            a2 = -m[1] / ssumm2 + P.polyval(rsn, C2)
            fac = np.sqrt((summ2 - 2.0 * m[0] ** 2 - 2.0 * m[1] ** 2) / (1.0 - 2.0 * a1 ** 2 - 2.0 * a2 ** 2))
            w[2:] = -m[2:] / fac
            w[1] = a2
        else:
            fac = np.sqrt((summ2 - 2.0 * m[0] ** 2) / (1.0 - 2.0 * a1 ** 2))
            w[1:] = -m[1:] / fac
        w[0] = a1
        # largest weight pairs with the largest order statistic
        a[n - half:] = w[::-1]
    a[:half] = -a[n - half:][::-1]
    a.setflags(write=False)
    return a


def _p_value(w: float, n: int) -> float:
    if n == 3:
        return clip_p(PI6 * (np.arcsin(np.sqrt(w)) - STQR))
    y = np.log1p(-w) if w < 1.0 else -np.inf
    if n <= 11:
        gamma = P.polyval(n, G)
        if y >= gamma:
            return 0.0
        y = -np.log(gamma - y)
        m = P.polyval(n, C3)
        s = np.exp(P.polyval(n, C4))
    else:
        ln = np.log(n)
        m = P.polyval(ln, C5)
        s = np.exp(P.polyval(ln, C6))
    if not np.isfinite(y):
        return 1.0
    return clip_p(norm.sf(y, loc=m, scale=s))


def shapiro_wilk(x) -> TestResult:
    """
    Shapiro-Wilk normality test.

    W is the squared correlation between the sorted sample and the weights from
    `swilk_coefficients`; the p-value follows Royston's normalizing transformation,
    exact for n = 3.

    Raises
    ------
    InsufficientSampleError
        Fewer than 3 values.
    DegenerateSampleError
        All values equal.
    """
    x = np.sort(np.asarray(x, dtype=float))
    n = len(x)
    if n < MIN_N:
        raise InsufficientSampleError(f'Shapiro-Wilk needs at least {MIN_N} values, got {n}')
    if n > MAX_N:
        logging.warning(f'Shapiro-Wilk p-value may be inaccurate for n = {n} > {MAX_N}')
    centered = x - x.mean()
    ssq = np.sum(centered ** 2)
    if x[-1] - x[0] <= 0 or ssq <= 0:
        raise DegenerateSampleError('Shapiro-Wilk is undefined for a constant sample')

    a = swilk_coefficients(n)
    w = float(np.dot(a, centered) ** 2 / (np.dot(a, a) * ssq))
    w = min(w, 1.0)
    return TestResult(test_name='shapiro_wilk', statistic=w, p_value=_p_value(w, n), meta={'n': n})

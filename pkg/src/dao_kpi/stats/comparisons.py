"""Group comparisons: Levene / Brown-Forsythe, one-way ANOVA, Kruskal-Wallis and Dunn's post-hoc test."""
import itertools
import logging
from typing import List

import numpy as np
import pandas as pd
import scikit_posthocs as sp
import scipy.stats as ss

from dao_kpi.errors import ArgumentError, DegenerateSampleError, InsufficientSampleError
from dao_kpi.stats.data_utils import GroupedSamples, TestResult, clip_p


def _require_groups(g: GroupedSamples, test_name: str, min_k: int = 2) -> None:
    if g.k < min_k:
        raise InsufficientSampleError(f'{test_name} needs at least {min_k} groups, got {g.k}')


def _long_form(g: GroupedSamples) -> pd.DataFrame:
    return pd.DataFrame({'value': np.concatenate(g.values), 'group': np.repeat(g.labels, g.sizes)})


def levene(g: GroupedSamples, center: str = 'median') -> TestResult:
    """
    Levene test of equal variances on absolute deviations from each group's center;
    center='median' is the Brown-Forsythe variant.
    """
    _require_groups(g, 'Levene')
    if center not in ('mean', 'median'):
        raise ArgumentError(f'center must be "mean" or "median", got {center!r}')
    if min(g.sizes) < 2:
        raise InsufficientSampleError('Levene needs at least 2 values per group')

    k, N = g.k, g.N
    locate = np.mean if center == 'mean' else np.median
    deviations = [np.abs(values - locate(values)) for values in g.values]
    if all(np.ptp(d) == 0 for d in deviations):
        if np.ptp([d[0] for d in deviations]) > 0:
            raise DegenerateSampleError('Levene: no spread of deviations within any group')
        statistic, p_value = 0.0, 1.0
    else:
        result = ss.levene(*g.values, center=center)
        statistic, p_value = float(result.statistic), clip_p(result.pvalue)
    return TestResult(test_name=f'levene_{center}', statistic=statistic, p_value=p_value,
                      df=(k - 1, N - k), meta={'center': center})


def anova_oneway(g: GroupedSamples) -> TestResult:
    _require_groups(g, 'ANOVA')
    k, N = g.k, g.N
    if N <= k:
        raise InsufficientSampleError(f'ANOVA needs more values ({N}) than groups ({k})')
    if min(g.sizes) < 1:
        raise InsufficientSampleError('ANOVA: empty group')
    if all(np.ptp(values) == 0 for values in g.values):
        raise DegenerateSampleError('ANOVA: zero within-group variance in every group')

    result = ss.f_oneway(*g.values)
    return TestResult(test_name='anova_oneway', statistic=float(result.statistic),
                      p_value=clip_p(result.pvalue), df=(k - 1, N - k))


def kruskal_wallis(g: GroupedSamples) -> TestResult:
    """
    Tie-corrected Kruskal-Wallis H. The p-value uses the chi-square approximation
    with k - 1 degrees of freedom at every sample size; groups under 5 values are
    listed in meta.
    """
    _require_groups(g, 'Kruskal-Wallis')
    k, N = g.k, g.N
    if min(g.sizes) < 1:
        raise InsufficientSampleError('Kruskal-Wallis: empty group')
    if N < 3:
        raise InsufficientSampleError(f'Kruskal-Wallis needs at least 3 values, got {N}')
    if np.ptp(np.concatenate(g.values)) == 0:
        raise DegenerateSampleError('Kruskal-Wallis: all values are identical')

    result = ss.kruskal(*g.values)
    small = [label for label, n in zip(g.labels, g.sizes) if n < 5]
    meta = {'approximate_small_groups': small} if small else {}
    return TestResult(test_name='kruskal_wallis', statistic=max(0.0, float(result.statistic)),
                      p_value=clip_p(result.pvalue), df=(k - 1,), meta=meta)


def dunn_posthoc(g: GroupedSamples, adjust: str = 'bonferroni') -> List[TestResult]:
    """
    Dunn's pairwise z tests on mean-rank differences with the tie-corrected standard error.

    Returns
    -------
    results: list[TestResult]
        One per pair in label order; `statistic` is the signed z of group_a minus group_b,
        `p_value` is adjusted, `meta` holds the pair and the unadjusted p-value.
    """
    _require_groups(g, 'Dunn')
    if adjust not in ('bonferroni', 'none'):
        raise ArgumentError(f'adjust must be "bonferroni" or "none", got {adjust!r}')
    if g.k < 3:
        logging.warning('Dunn post-hoc test is unnecessary for two groups; returning the single pair anyway')
    frame = _long_form(g)
    if frame['value'].nunique() < 2:
        raise DegenerateSampleError('Dunn: all values are identical')

    raw = sp.posthoc_dunn(frame, val_col='value', group_col='group')
    adjusted = sp.posthoc_dunn(frame, val_col='value', group_col='group', p_adjust='bonferroni') \
        if adjust == 'bonferroni' else raw
    mean_ranks = frame.assign(rank=ss.rankdata(frame['value'])).groupby('group')['rank'].mean()

    results = []
    for a, b in itertools.combinations(g.labels, 2):
        raw_p = clip_p(raw.loc[a, b])
        z = float(ss.norm.isf(raw_p / 2.0)) if raw_p > 0 else float(ss.norm.isf(np.finfo(float).tiny))
        z = z if mean_ranks[a] >= mean_ranks[b] else -z
        results.append(TestResult(
            test_name='dunn',
            statistic=z,
            p_value=clip_p(adjusted.loc[a, b]),
            meta={'group_a': a, 'group_b': b, 'p_unadjusted': raw_p, 'adjust': adjust},
        ))
    return results

import itertools

import hypothesis.strategies as st
import numpy as np
import pytest
import scipy.stats
from hypothesis import assume, given, settings

from dao_kpi.errors import ArgumentError, DegenerateSampleError, InsufficientSampleError
from dao_kpi.kpi_engine import kpi_config as cfg
from dao_kpi.stats.battery import category_groups, run_battery
from dao_kpi.stats.box import box_stats
from dao_kpi.stats.comparisons import anova_oneway, dunn_posthoc, kruskal_wallis, levene
from dao_kpi.stats.correlation import pearson, spearman
from dao_kpi.stats.data_utils import GroupedSamples, TestResult
from dao_kpi.stats.normality import shapiro_wilk, swilk_coefficients
from dao_kpi.stats.plan import RULE_ANOVA, RULE_NOT_NORMAL, RULE_POSTHOC, RULE_UNEQUAL_VARIANCE, select_test


SEEDS = range(24)


def _normal_scores(n, loc=0.0, scale=1.0):
    return loc + scale * scipy.stats.norm.ppf((np.arange(1, n + 1) - 0.5) / n)


def _exponential_scores(n):
    return -np.log(1.0 - (np.arange(1, n + 1) - 0.5) / n)


def _samples(seed, sizes):
    rng = np.random.default_rng(seed)
    return [rng.gamma(2.0, 1.0 + i, size=n) for i, n in enumerate(sizes)]


def _fixture_groups(seed):
    """ 2 to 5 groups of 3 to 30 values; every other seed rounds to one decimal to create ties. """
    rng = np.random.default_rng(1000 + seed)
    k = 2 + seed % 4
    samples = [rng.gamma(2.0 + i, 1.0 + 0.5 * i, size=rng.integers(3, 31)) for i in range(k)]
    if seed % 2:
        samples = [np.round(s, 1) for s in samples]
    return samples


def _groups(samples):
    return GroupedSamples.from_pairs((f'g{i}', s) for i, s in enumerate(samples))


def _tie_sum(pooled):
    _, counts = np.unique(pooled, return_counts=True)
    return float(np.sum(counts.astype(float) ** 3 - counts))


def _levene_reference(samples, center):
    locate = np.mean if center == 'mean' else np.median
    z = [np.abs(s - locate(s)) for s in samples]
    k, N = len(samples), sum(len(s) for s in samples)
    grand = np.concatenate(z).mean()
    between = sum(len(zi) * (zi.mean() - grand) ** 2 for zi in z)
    within = sum(np.sum((zi - zi.mean()) ** 2) for zi in z)
    w = (N - k) / (k - 1) * between / within
    return w, scipy.stats.f.sf(w, k - 1, N - k)


def _anova_reference(samples):
    k, N = len(samples), sum(len(s) for s in samples)
    grand = np.concatenate(samples).mean()
    between = sum(len(s) * (s.mean() - grand) ** 2 for s in samples)
    within = sum(np.sum((s - s.mean()) ** 2) for s in samples)
    f = (between / (k - 1)) / (within / (N - k))
    return f, scipy.stats.f.sf(f, k - 1, N - k)


def _kruskal_reference(samples):
    pooled = np.concatenate(samples)
    N, ranks = len(pooled), scipy.stats.rankdata(pooled)
    bounds = np.cumsum([0] + [len(s) for s in samples])
    h = 12.0 / (N * (N + 1)) * sum(ranks[bounds[i]:bounds[i + 1]].sum() ** 2 / len(s)
                                   for i, s in enumerate(samples)) - 3.0 * (N + 1)
    h /= 1.0 - _tie_sum(pooled) / (N ** 3 - N)
    return h, scipy.stats.chi2.sf(h, len(samples) - 1)


def _dunn_reference(samples):
    pooled = np.concatenate(samples)
    N, ranks = len(pooled), scipy.stats.rankdata(pooled)
    bounds = np.cumsum([0] + [len(s) for s in samples])
    mean_ranks = [ranks[bounds[i]:bounds[i + 1]].mean() for i in range(len(samples))]
    variance = N * (N + 1) / 12.0 - _tie_sum(pooled) / (12.0 * (N - 1))
    result = []
    for i, j in itertools.combinations(range(len(samples)), 2):
        z = (mean_ranks[i] - mean_ranks[j]) / np.sqrt(variance * (1.0 / len(samples[i]) + 1.0 / len(samples[j])))
        result.append((z, 2.0 * scipy.stats.norm.sf(abs(z))))
    return result


def _pearson_reference(x, y):
    dx, dy = x - x.mean(), y - y.mean()
    r = np.dot(dx, dy) / np.sqrt(np.dot(dx, dx) * np.dot(dy, dy))
    n = len(x)
    t = r * np.sqrt((n - 2) / (1.0 - r ** 2))
    return r, 2.0 * scipy.stats.t.sf(abs(t), n - 2)


def _correlated_pair(seed):
    rng = np.random.default_rng(2000 + seed)
    n = 3 + 4 * seed
    x = rng.normal(size=n)
    y = (0.1 + 0.05 * seed) * x + rng.normal(size=n)
    if seed % 3 == 0 and n >= 10:
        x, y = np.round(x, 1), np.round(y, 1)
    return x, y


def _shapiro_sample(seed):
    rng = np.random.default_rng(seed)
    n = [3, 4, 5, 7, 9, 11, 12, 15, 20, 30, 50, 80, 120, 200, 350, 500][seed % 16]
    draw = [rng.normal, rng.lognormal, rng.uniform][seed % 3]
    return draw(size=n)


@pytest.mark.parametrize('seed', SEEDS)
def test_shapiro_matches_scipy(seed):
    x = _shapiro_sample(seed)
    ours = shapiro_wilk(x)
    expected = scipy.stats.shapiro(x)
    assert ours.statistic == pytest.approx(expected.statistic, rel=1e-6)
    assert ours.p_value == pytest.approx(expected.pvalue, abs=1e-4)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(min_value=-1000, max_value=1000), min_size=3, max_size=60),
       st.integers(min_value=1, max_value=50), st.integers(min_value=-10_000, max_value=10_000))
def test_shapiro_invariant_under_affine_transform(values, scale, shift):
    assume(len(set(values)) > 1)
    base = shapiro_wilk(values)
    moved = shapiro_wilk([scale * v + shift for v in values])
    assert moved.statistic == pytest.approx(base.statistic, rel=1e-9, abs=1e-12)
    assert moved.p_value == pytest.approx(base.p_value, rel=1e-6, abs=1e-9)


@pytest.mark.parametrize('n', [3, 4, 7, 20, 101])
def test_swilk_coefficients_are_antisymmetric_unit_vectors(n):
    a = swilk_coefficients(n)
    assert np.dot(a, a) == pytest.approx(1.0, abs=1e-3)
    np.testing.assert_allclose(a, -a[::-1])
    assert a[-1] > 0


def test_shapiro_rejects_small_and_constant_samples():
    with pytest.raises(InsufficientSampleError):
        shapiro_wilk([1.0, 2.0])
    with pytest.raises(DegenerateSampleError):
        shapiro_wilk([4.0, 4.0, 4.0, 4.0])


def test_shapiro_separates_normal_from_skewed():
    assert shapiro_wilk(_normal_scores(30)).p_value > 0.5
    assert shapiro_wilk(_exponential_scores(30)).p_value < 0.05


@pytest.mark.parametrize('center', ['median', 'mean'])
@pytest.mark.parametrize('seed', SEEDS)
def test_levene_matches_reference(seed, center):
    samples = _fixture_groups(seed)
    ours = levene(_groups(samples), center=center)
    statistic, p_value = _levene_reference(samples, center)
    assert ours.statistic == pytest.approx(statistic, rel=1e-9)
    assert ours.p_value == pytest.approx(p_value, rel=1e-7, abs=1e-12)
    assert ours.df == (len(samples) - 1, sum(len(s) for s in samples) - len(samples))


def test_levene_rejects_unknown_center():
    with pytest.raises(ArgumentError):
        levene(_groups(_samples(0, (4, 4))), center='trimmed')


@pytest.mark.parametrize('seed', SEEDS)
def test_anova_matches_reference(seed):
    samples = _fixture_groups(seed)
    ours = anova_oneway(_groups(samples))
    statistic, p_value = _anova_reference(samples)
    assert ours.statistic == pytest.approx(statistic, rel=1e-9)
    assert ours.p_value == pytest.approx(p_value, rel=1e-7, abs=1e-12)


@pytest.mark.parametrize('seed', SEEDS)
def test_kruskal_matches_reference(seed):
    samples = _fixture_groups(seed)
    ours = kruskal_wallis(_groups(samples))
    statistic, p_value = _kruskal_reference(samples)
    assert ours.statistic == pytest.approx(statistic, rel=1e-9)
    assert ours.p_value == pytest.approx(p_value, rel=1e-7, abs=1e-12)
    assert ours.df == (len(samples) - 1,)


def test_kruskal_known_value():
    result = kruskal_wallis(_groups([[1, 2, 3], [4, 5, 6]]))
    assert result.statistic == pytest.approx(3.857142857)
    assert result.df == (1,)
    assert result.meta['approximate_small_groups'] == ['g0', 'g1']


def test_kruskal_rejects_identical_values():
    with pytest.raises(DegenerateSampleError):
        kruskal_wallis(_groups([[3, 3], [3, 3, 3]]))


def test_anova_rejects_zero_within_variance():
    with pytest.raises(DegenerateSampleError):
        anova_oneway(_groups([[1, 1, 1], [2, 2, 2]]))


@pytest.mark.parametrize('seed', SEEDS)
def test_dunn_matches_reference(seed):
    samples = _fixture_groups(seed)
    results = dunn_posthoc(_groups(samples))
    expected = _dunn_reference(samples)
    pairs = list(itertools.combinations(range(len(samples)), 2))
    assert [(r.meta['group_a'], r.meta['group_b']) for r in results] == [(f'g{i}', f'g{j}') for i, j in pairs]
    for result, (z, raw_p) in zip(results, expected):
        assert result.statistic == pytest.approx(z, rel=1e-6, abs=1e-9)
        assert result.meta['p_unadjusted'] == pytest.approx(raw_p, rel=1e-7, abs=1e-12)
        assert result.p_value == pytest.approx(min(1.0, len(pairs) * raw_p), rel=1e-7, abs=1e-12)


def test_dunn_pairs_and_bonferroni():
    results = dunn_posthoc(_groups([_normal_scores(10), _normal_scores(10, 2), _normal_scores(10, 4)]))
    assert [(r.meta['group_a'], r.meta['group_b']) for r in results] == [('g0', 'g1'), ('g0', 'g2'), ('g1', 'g2')]
    for r in results:
        assert r.p_value == pytest.approx(min(1.0, 3 * r.meta['p_unadjusted']))
        assert r.statistic < 0
    assert results[1].p_value < results[0].p_value
    unadjusted = dunn_posthoc(_groups([_normal_scores(10), _normal_scores(10, 2), _normal_scores(10, 4)]),
                              adjust='none')
    assert [r.p_value for r in unadjusted] == pytest.approx([r.meta['p_unadjusted'] for r in results])
    with pytest.raises(ArgumentError):
        dunn_posthoc(_groups([[1, 2], [3, 4]]), adjust='holm')
    with pytest.raises(DegenerateSampleError):
        dunn_posthoc(_groups([[2, 2], [2, 2], [2]]))


@pytest.mark.parametrize('seed', SEEDS)
def test_correlations_match_reference(seed):
    x, y = _correlated_pair(seed)
    r, p_value = _pearson_reference(x, y)
    ours = pearson(x, y)
    assert ours.statistic == pytest.approx(r, rel=1e-9, abs=1e-12)
    assert ours.p_value == pytest.approx(p_value, rel=1e-6, abs=1e-12)
    assert ours.df == (len(x) - 2,)
    rho, p_value = _pearson_reference(scipy.stats.rankdata(x), scipy.stats.rankdata(y))
    ours = spearman(x, y)
    assert ours.statistic == pytest.approx(rho, rel=1e-9, abs=1e-12)
    assert ours.p_value == pytest.approx(p_value, rel=1e-6, abs=1e-12)


def test_correlation_input_errors():
    with pytest.raises(InsufficientSampleError):
        pearson([1, 2], [3, 4])
    with pytest.raises(ArgumentError):
        spearman([1, 2, 3], [1, 2])
    with pytest.raises(DegenerateSampleError):
        pearson([1, 1, 1], [1, 2, 3])
    perfect = spearman([1, 2, 3, 4], [10, 20, 30, 40])
    assert perfect.statistic == pytest.approx(1.0)
    assert perfect.p_value == pytest.approx(0.0, abs=1e-9)


integer_groups = st.lists(st.lists(st.integers(min_value=-50, max_value=50), min_size=2, max_size=8),
                          min_size=2, max_size=4)


@settings(max_examples=100, deadline=None)
@given(integer_groups)
def test_kruskal_invariant_under_monotone_transform(samples):
    pooled = [v for s in samples for v in s]
    assume(len(set(pooled)) > 1)
    base = kruskal_wallis(_groups(samples))
    shifted = kruskal_wallis(_groups([[np.exp(v / 10.0) + 3 for v in s] for s in samples]))
    assert shifted.statistic == pytest.approx(base.statistic, rel=1e-9, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(integer_groups)
def test_anova_invariant_under_affine_transform(samples):
    assume(any(len(set(s)) > 1 for s in samples))
    base = anova_oneway(_groups(samples))
    scaled = anova_oneway(_groups([[3 * v + 7 for v in s] for s in samples]))
    assert scaled.statistic == pytest.approx(base.statistic, rel=1e-9, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(-100, 100), st.integers(-100, 100)), min_size=3, max_size=30))
def test_spearman_invariant_under_monotone_transform(pairs):
    x, y = [p[0] for p in pairs], [p[1] for p in pairs]
    assume(len(set(x)) > 1 and len(set(y)) > 1)
    base = spearman(x, y)
    moved = spearman([v ** 3 for v in x], [2 * v - 1 for v in y])
    assert moved.statistic == pytest.approx(base.statistic, abs=1e-9)


def test_plan_uses_anova_for_normal_equal_variance_groups():
    g = _groups([_normal_scores(20), _normal_scores(20, 1), _normal_scores(20, 2)])
    plan = select_test(g)
    assert plan.chosen == 'anova_oneway'
    assert [c.status for c in plan.normality] == ['passed'] * 3
    assert plan.homogeneity.status == 'passed'
    assert plan.rules == [RULE_ANOVA, RULE_POSTHOC]
    assert len(plan.posthoc) == 3


def test_plan_falls_back_for_skewed_data():
    plan = select_test(_groups([_exponential_scores(30), _exponential_scores(30) + 0.1]))
    assert plan.chosen == 'kruskal_wallis'
    assert RULE_NOT_NORMAL in plan.rules
    assert plan.posthoc == []


def test_plan_falls_back_for_unequal_variances():
    plan = select_test(_groups([_normal_scores(30), _normal_scores(30, scale=10)]))
    assert plan.chosen == 'kruskal_wallis'
    assert plan.rules == [RULE_UNEQUAL_VARIANCE]


def test_plan_treats_constant_group_as_not_normal():
    plan = select_test(_groups([[5.0, 5.0, 5.0], _normal_scores(10)]))
    assert plan.normality[0].status == 'degenerate'
    assert plan.chosen == 'kruskal_wallis'


def test_plan_skips_posthoc_for_two_groups():
    plan = select_test(_groups([_normal_scores(20), _normal_scores(20, 5)]))
    assert plan.omnibus.p_value < 0.05
    assert RULE_POSTHOC not in plan.rules
    assert plan.posthoc == []


def test_plan_needs_two_groups():
    with pytest.raises(InsufficientSampleError):
        select_test(_groups([[1.0, 2.0, 3.0]]))


def test_box_stats():
    box = box_stats([100, 1, 2, 3, 4, 5, 6, 7, 8, 9])
    assert (box.q1, box.median, box.q3) == pytest.approx((3.25, 5.5, 7.75))
    assert (box.whisker_low, box.whisker_high) == (1.0, 9.0)
    assert box.outliers == (100.0,)
    assert box.notch_high - box.median == pytest.approx(1.57 * 4.5 / np.sqrt(10))
    with pytest.raises(InsufficientSampleError):
        box_stats([])


def test_p_value_outside_unit_interval_is_rejected():
    with pytest.raises(ValueError):
        TestResult('x', 1.0, 1.5)


def test_category_groups_follow_level_order(entry_factory):
    entries = [
        entry_factory('d1', {'participation': cfg.HIGH}, {'participation_rate': 0.6}),
        entry_factory('d2', {'participation': cfg.LOW}, {'participation_rate': 0.05}),
        entry_factory('d3', {'participation': cfg.HIGH}, {'participation_rate': 0.5}),
        entry_factory('d4', {}, {'participation_rate': None}),
    ]
    g = category_groups(entries, 'participation')
    assert g.labels == [cfg.LOW, cfg.HIGH]
    assert [list(v) for v in g.values] == [[0.05], [0.6, 0.5]]


def test_battery_records_skipped_tests(entry_factory):
    entries = [entry_factory('only', {kpi: cfg.HIGH for kpi in cfg.KPI_NAMES})]
    report = run_battery(entries, alpha=0.01)
    assert report['alpha'] == 0.01
    assert all('skipped' in report['kpi_tests'][kpi] for kpi in cfg.KPI_NAMES)
    assert all('skipped' in c for c in report['correlations'])


def test_battery_runs_comparisons_and_correlations(entry_factory):
    entries = []
    for i in range(12):
        level = cfg.LEVEL_ORDER['participation'][i % 3]
        rate = 0.05 + 0.2 * (i % 3) + 0.01 * i
        entries.append(entry_factory(f'dao-{i:02d}', {'participation': level},
                                     {'participation_rate': rate, 'largest_holder_share': 0.9 - rate,
                                      'total_members': 50 + 10 * i}))
    report = run_battery(entries)
    participation = report['kpi_tests']['participation']
    assert participation['metric'] == 'participation_rate'
    assert participation['group_sizes'] == {cfg.LOW: 4, cfg.MEDIUM: 4, cfg.HIGH: 4}
    assert participation['chosen'] in ('anova_oneway', 'kruskal_wallis')
    holder = [c for c in report['correlations'] if c['name'] == 'holder_share_vs_participation']
    assert [c['result']['statistic'] for c in holder] == pytest.approx([-1.0, -1.0])

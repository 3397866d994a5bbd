"""Run the test battery over assessed DAOs: one group comparison per KPI plus the correlation set."""
import logging
from typing import Any, Callable, Dict, List, Optional, Tuple

from dao_kpi.errors import DaoKpiError
from dao_kpi.kpi_engine.kpi_config import KPI_NAMES, LEVEL_ORDER
from dao_kpi.stats.correlation import pearson, spearman
from dao_kpi.stats.data_utils import GroupedSamples, TestResult
from dao_kpi.stats.plan import DEFAULT_ALPHA, select_test


# metric compared across the levels of each KPI
CATEGORY_METRIC = {
    'participation': 'participation_rate',
    'funds': 'treasury_usd',
    'voting': 'approval_rate',
    'decentralisation': 'proposer_concentration',
}

# (name, test, x metric, y metric)
CORRELATIONS: List[Tuple[str, Callable[..., TestResult], str, str]] = [
    ('treasury_vs_circulating', pearson, 'treasury_usd', 'circulating_pct'),
    ('holder_share_vs_participation', pearson, 'largest_holder_share', 'participation_rate'),
    ('holder_share_vs_participation', spearman, 'largest_holder_share', 'participation_rate'),
    ('members_vs_participation', spearman, 'total_members', 'participation_rate'),
]


def metric_value(entry: Dict[str, Any], name: str) -> Optional[float]:
    value = entry['metrics'].get(name)
    return None if value is None else float(value)


def category_groups(entries: List[Dict[str, Any]], kpi: str) -> GroupedSamples:
    """ Values of the KPI's metric grouped by assessed level, lowest level first; empty levels left out. """
    metric = CATEGORY_METRIC[kpi]
    by_level: Dict[str, List[float]] = {level: [] for level in LEVEL_ORDER[kpi]}
    for entry in sorted(entries, key=lambda e: e['dao_id']):
        level = entry['assessment'][kpi]['level']
        value = metric_value(entry, metric)
        if level in by_level and value is not None:
            by_level[level].append(value)
    return GroupedSamples.from_pairs((level, values) for level, values in by_level.items() if values)


def run_battery(entries: List[Dict[str, Any]], alpha: float = DEFAULT_ALPHA) -> Dict[str, Any]:
    """
    Parameters
    ----------
    entries: list[dict]
        Per-DAO {"dao_id", "metrics", "assessment"} as written by the kpi stage.
    alpha: float
        Significance level for every gate and the post-hoc trigger.

    Returns
    -------
    report: dict
        {"alpha", "kpi_tests": {kpi: plan or {"skipped": reason}},
         "correlations": [{"name", "result" or "skipped"}]}
    """
    kpi_tests = {}
    for kpi in KPI_NAMES:
        groups = category_groups(entries, kpi)
        try:
            plan = select_test(groups, alpha=alpha)
        except DaoKpiError as e:
            logging.info(f'Skipping {kpi} comparison: {e}')
            kpi_tests[kpi] = {'skipped': str(e), 'group_sizes': dict(zip(groups.labels, groups.sizes))}
            continue
        kpi_tests[kpi] = {'metric': CATEGORY_METRIC[kpi], 'group_sizes': dict(zip(groups.labels, groups.sizes)),
                          **plan.to_dict()}

    correlations = []
    ordered = sorted(entries, key=lambda e: e['dao_id'])
    for name, test, x_name, y_name in CORRELATIONS:
        pairs = [(metric_value(e, x_name), metric_value(e, y_name)) for e in ordered]
        pairs = [(x, y) for x, y in pairs if x is not None and y is not None]
        item = {'name': name, 'x': x_name, 'y': y_name, 'n': len(pairs)}
        try:
            item['result'] = test([x for x, _ in pairs], [y for _, y in pairs]).to_dict()
        except DaoKpiError as e:
            logging.info(f'Skipping correlation {name}: {e}')
            item['skipped'] = str(e)
        correlations.append(item)
    return {'alpha': alpha, 'kpi_tests': kpi_tests, 'correlations': correlations}

"""Cross-DAO aggregates over KPI documents."""
from collections import Counter
from typing import Any, Dict, List, Optional

import numpy as np

from dao_kpi.errors import ArgumentError
from dao_kpi.kpi_engine.kpi_config import KPI_NAMES, LEVEL_ORDER, NOT_ASSESSABLE
from dao_kpi.report.data_utils import EcosystemSummary
from dao_kpi.stats.battery import CATEGORY_METRIC, metric_value


def kpi_entry(document: Dict[str, Any]) -> Dict[str, Any]:
    """ Flatten a KPI document into the per-DAO entry the stats and report stages work on. """
    record = document['record']
    return {
        'dao_id': record['dao_id'],
        'chain_id': record['chain_id'],
        'activity_tier': record['activity_tier'],
        'voters': record['voters'],
        'total_proposals': len(record['proposals']),
        'metrics': document['kpi']['metrics'],
        'assessment': document['kpi']['assessment'],
    }


def summarize_ecosystem(entries: List[Dict[str, Any]], stat_report: Optional[Dict[str, Any]] = None) -> EcosystemSummary:
    """
    Totals are exact sums over DAOs; a voter address is counted once per chain
    however many DAOs it voted in.
    """
    if not entries:
        raise ArgumentError('Cannot summarize an empty set of DAOs')

    voters = {(e['chain_id'], voter) for e in entries for voter in e['voters']}
    histograms, not_assessable, medians = {}, {}, {}
    for kpi in KPI_NAMES:
        levels = Counter(e['assessment'][kpi]['level'] for e in entries)
        not_assessable[kpi] = levels.pop(NOT_ASSESSABLE, 0)
        histograms[kpi] = {level: levels.get(level, 0) for level in LEVEL_ORDER[kpi]}
        medians[kpi] = {}
        for level in LEVEL_ORDER[kpi]:
            values = [metric_value(e, CATEGORY_METRIC[kpi]) for e in entries if e['assessment'][kpi]['level'] == level]
            values = [v for v in values if v is not None]
            if values:
                medians[kpi][level] = float(np.median(values))

    composites = [float(e['assessment']['composite']) for e in entries if e['assessment']['composite'] is not None]
    return EcosystemSummary(
        dao_count=len(entries),
        total_proposals=sum(e['total_proposals'] for e in entries),
        unique_voters=len(voters),
        total_members=sum(e['metrics']['total_members'] for e in entries),
        level_histograms=histograms,
        not_assessable=not_assessable,
        category_medians=medians,
        tier_histogram=dict(sorted(Counter(e['activity_tier'] for e in entries).items())),
        composite_median=float(np.median(composites)) if composites else None,
        correlations=[] if stat_report is None else stat_report.get('correlations', []),
    )

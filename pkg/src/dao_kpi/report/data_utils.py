from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple


CHART_KINDS = ('notched_box', 'violin', 'scatter_threshold', 'radar')
AXIS_SCALES = ('linear', 'log10')


@dataclass
class EcosystemSummary:
    dao_count: int
    total_proposals: int
    unique_voters: int
    total_members: int
    level_histograms: Dict[str, Dict[str, int]]
    not_assessable: Dict[str, int]
    category_medians: Dict[str, Dict[str, float]]
    tier_histogram: Dict[str, int]
    composite_median: Optional[float] = None
    correlations: List[Dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'dao_count': self.dao_count,
            'total_proposals': self.total_proposals,
            'unique_voters': self.unique_voters,
            'total_members': self.total_members,
            'level_histograms': self.level_histograms,
            'not_assessable': self.not_assessable,
            'category_medians': self.category_medians,
            'tier_histogram': self.tier_histogram,
            'composite_median': self.composite_median,
            'correlations': self.correlations,
        }


@dataclass
class Series:
    label: str
    points: List[Tuple[str, float, float]] = field(default_factory=list) # (dao_id, x, y)
    values: List[float] = field(default_factory=list)
    box: Optional[Dict[str, Any]] = None
    density: Optional[Dict[str, Any]] = None # violin outline: coords, vals, extrema

    def to_dict(self) -> Dict[str, Any]:
        data = {'label': self.label}
        if self.points:
            data['points'] = [{'dao_id': d, 'x': x, 'y': y} for d, x, y in self.points]
        if self.values:
            data['values'] = list(self.values)
        if self.box is not None:
            data['box'] = self.box
        if self.density is not None:
            data['density'] = self.density
        return data


@dataclass
class ChartData:
    name: str
    chart_kind: str
    title: str
    series: List[Series]
    thresholds: Dict[str, List[Tuple[str, float]]] = field(default_factory=dict) # axis -> [(label, value)]
    x_label: str = ''
    y_label: str = ''
    x_scale: str = 'linear'
    y_scale: str = 'linear'
    axes: List[str] = field(default_factory=list) # radar spokes
    omitted: List[Tuple[str, str]] = field(default_factory=list) # (dao_id, reason)
    fit: Optional[Dict[str, Any]] = None # least-squares line over every scatter point

    def __post_init__(self):
        if self.chart_kind not in CHART_KINDS:
            raise ValueError(f'Unknown chart kind {self.chart_kind}')
        if self.x_scale not in AXIS_SCALES or self.y_scale not in AXIS_SCALES:
            raise ValueError(f'Unknown axis scale {self.x_scale}/{self.y_scale}')

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'chart_kind': self.chart_kind,
            'title': self.title,
            'series': [s.to_dict() for s in self.series],
            'thresholds': {axis: [{'label': l, 'value': v} for l, v in lines]
                           for axis, lines in self.thresholds.items()},
            'x_label': self.x_label,
            'y_label': self.y_label,
            'x_scale': self.x_scale,
            'y_scale': self.y_scale,
            'axes': list(self.axes),
            'omitted': [{'dao_id': d, 'reason': r} for d, r in self.omitted],
            'fit': self.fit,
        }


@dataclass
class ReportBundle:
    summary: EcosystemSummary
    entries: List[Dict[str, Any]]
    stat_report: Dict[str, Any]
    charts: List[ChartData]
    omissions: List[Tuple[str, str, str]] # (chart, dao_id, reason)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'summary': self.summary.to_dict(),
            'daos': [{key: e[key] for key in ('dao_id', 'chain_id', 'activity_tier', 'metrics', 'assessment')}
                     for e in self.entries],
            'stat_report': self.stat_report,
            'charts': [c.to_dict() for c in self.charts],
            'omissions': [{'chart': c, 'dao_id': d, 'reason': r} for c, d, r in self.omissions],
        }

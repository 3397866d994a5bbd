"""Chart geometry: threshold scatters with a fit line, notched boxes and violins per level, the composite radar."""
from decimal import Decimal
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.stats as ss

from dao_kpi.errors import ArgumentError, DaoKpiError
from dao_kpi.kpi_engine.kpi_config import CHART_THRESHOLDS, KPI_NAMES, LEVEL_ORDER, NOT_ASSESSABLE
from dao_kpi.report.data_utils import ChartData, Series
from dao_kpi.stats.battery import CATEGORY_METRIC, metric_value
from dao_kpi.stats.box import box_stats


RADAR_DEFAULT_COUNT = 10
MAX_SCORE = Decimal('3')

# kpi -> (x metric, x scale, y metric, y scale)
SCATTER_AXES = {
    'participation': ('total_members', 'log10', 'participation_rate', 'linear'),
    'funds': ('treasury_usd', 'log10', 'circulating_pct', 'linear'),
    'voting': ('approval_rate', 'linear', 'avg_duration_days', 'linear'),
    'decentralisation': ('largest_holder_share', 'linear', 'participation_rate', 'linear'),
}

AXIS_LABELS = {
    'total_members': 'Total members',
    'participation_rate': 'Participation rate',
    'treasury_usd': 'Treasury value (USD)',
    'circulating_pct': 'Circulating token share',
    'approval_rate': 'Proposal approval rate',
    'avg_duration_days': 'Average proposal duration (days)',
    'largest_holder_share': 'Largest holder share',
    'proposer_concentration': 'Proposer concentration',
}

BOX_SCALES = {'funds': 'log10'}
VIOLIN_GRID_POINTS = 100

Omitted = List[Tuple[str, str]]


def _threshold_lines(values: Sequence[float]) -> List[Tuple[str, float]]:
    return [(f'{v:g}', float(v)) for v in values]


def _check_log_axis(dao_id: str, axis: str, value: float):
    if value <= 0:
        raise ArgumentError(f'DAO {dao_id} has nonpositive value {value} on log-scale {axis} axis')


def _to_axis(values, scale: str) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return np.log10(values) if scale == 'log10' else values


def _from_axis(values: np.ndarray, scale: str) -> np.ndarray:
    return 10.0 ** values if scale == 'log10' else values


def fit_line(points: Sequence[Tuple[str, float, float]], x_scale: str = 'linear', y_scale: str = 'linear') \
        -> Optional[Dict[str, Any]]:
    """
    Least-squares line through the points in axis space (log10 on log axes), so it is straight as drawn.

    Returns
    -------
    fit: dict or None
        slope and intercept in axis space, and ``ends``: the line at the smallest and largest x, in data
        units. None for fewer than two distinct x values.
    """
    if len(points) < 2:
        return None
    x = _to_axis([p[1] for p in points], x_scale)
    y = _to_axis([p[2] for p in points], y_scale)
    if np.ptp(x) == 0:
        return None
    slope, intercept = np.polyfit(x, y, 1)
    ends_x = np.array([x.min(), x.max()])
    ends_y = _from_axis(slope * ends_x + intercept, y_scale)
    return {
        'slope': float(slope),
        'intercept': float(intercept),
        'n': len(points),
        'x_scale': x_scale,
        'y_scale': y_scale,
        'ends': [[float(a), float(b)] for a, b in zip(_from_axis(ends_x, x_scale), ends_y)],
    }


def violin_density(values: Sequence[float], scale: str = 'linear', grid_points: int = VIOLIN_GRID_POINTS) \
        -> Dict[str, Any]:
    """
    Gaussian KDE outline of one violin (Scott's bandwidth), evaluated on an even grid from the smallest
    to the largest value in axis space. A constant sample is a single point of unit height.
    """
    t = _to_axis(values, scale)
    lo, hi = float(t.min()), float(t.max())
    if hi == lo:
        coords, density = np.array([lo]), np.array([1.0])
    else:
        coords = np.linspace(lo, hi, grid_points)
        density = ss.gaussian_kde(t)(coords)
    data = np.asarray(values, dtype=float)
    return {
        'coords': [float(c) for c in _from_axis(coords, scale)],
        'vals': [float(d) for d in density],
        'mean': float(data.mean()),
        'median': float(np.median(data)),
        'min': float(data.min()),
        'max': float(data.max()),
    }


def make_chart(kind: str, inputs: List[Dict[str, Any]], thresholds: Optional[Dict[str, Sequence[float]]] = None, *,
               name: str, title: str = '', x_label: str = '', y_label: str = '', x_scale: str = 'linear',
               y_scale: str = 'linear', groups: Sequence[str] = (), axes: Sequence[str] = ()) -> ChartData:
    """
    Build one chart from per-DAO inputs.

    Inputs by kind:
      scatter_threshold  {"dao_id", "group", "x", "y"}
      notched_box        {"dao_id", "group", "value"}
      violin             {"dao_id", "group", "value"}
      radar              {"dao_id", "values": [score, ...]} in the order of ``axes``

    Series follow ``groups`` order (radar: input order); empty groups are left out.
    """
    if not inputs:
        raise ArgumentError(f'Chart {name} has no inputs')
    thresholds = {axis: _threshold_lines(values) for axis, values in (thresholds or {}).items()}
    chart = ChartData(name=name, chart_kind=kind, title=title, series=[], thresholds=thresholds,
                      x_label=x_label, y_label=y_label, x_scale=x_scale, y_scale=y_scale, axes=list(axes))

    if kind == 'scatter_threshold':
        for item in inputs:
            if x_scale == 'log10':
                _check_log_axis(item['dao_id'], 'x', item['x'])
            if y_scale == 'log10':
                _check_log_axis(item['dao_id'], 'y', item['y'])
        for group in groups:
            points = sorted((i['dao_id'], float(i['x']), float(i['y'])) for i in inputs if i['group'] == group)
            if points:
                chart.series.append(Series(label=group, points=points))
        chart.fit = fit_line([p for s in chart.series for p in s.points], x_scale, y_scale)

    elif kind in ('notched_box', 'violin'):
        if y_scale == 'log10':
            for item in inputs:
                _check_log_axis(item['dao_id'], 'y', item['value'])
        for group in groups:
            members = sorted((i['dao_id'], float(i['value'])) for i in inputs if i['group'] == group)
            if not members:
                continue
            values = [v for _, v in members]
            if kind == 'notched_box':
                chart.series.append(Series(label=group, values=values, box=box_stats(values).to_dict()))
            else:
                chart.series.append(Series(label=group, values=values, density=violin_density(values, y_scale)))

    else:
        for item in inputs:
            values = [float(v) for v in item['values']]
            if len(values) != len(axes):
                raise ArgumentError(f'Radar input for {item["dao_id"]} has {len(values)} values for {len(axes)} axes')
            if any(v < 0 or v > 1 for v in values):
                raise ArgumentError(f'Radar input for {item["dao_id"]} is outside [0, 1]')
            chart.series.append(Series(label=item['dao_id'], values=values))
    return chart


def _level(entry: Dict[str, Any], kpi: str) -> str:
    return entry['assessment'][kpi]['level']


def scatter_chart(entries: List[Dict[str, Any]], kpi: str) -> Tuple[Optional[ChartData], Omitted]:
    x_name, x_scale, y_name, y_scale = SCATTER_AXES[kpi]
    inputs, omitted = [], []
    for entry in sorted(entries, key=lambda e: e['dao_id']):
        x, y = metric_value(entry, x_name), metric_value(entry, y_name)
        if _level(entry, kpi) == NOT_ASSESSABLE:
            omitted.append((entry['dao_id'], f'{kpi} not assessable'))
        elif x is None or y is None:
            omitted.append((entry['dao_id'], f'{x_name if x is None else y_name} missing'))
        elif (x_scale == 'log10' and x <= 0) or (y_scale == 'log10' and y <= 0):
            omitted.append((entry['dao_id'], 'nonpositive value on log axis'))
        else:
            inputs.append({'dao_id': entry['dao_id'], 'group': _level(entry, kpi), 'x': x, 'y': y})
    if not inputs:
        return None, omitted
    chart = make_chart('scatter_threshold', inputs, CHART_THRESHOLDS[kpi], name=f'{kpi}_scatter',
                       title=f'{kpi.capitalize()} KPI', x_label=AXIS_LABELS[x_name], y_label=AXIS_LABELS[y_name],
                       x_scale=x_scale, y_scale=y_scale, groups=LEVEL_ORDER[kpi])
    chart.omitted = omitted
    return chart, omitted


def box_chart(entries: List[Dict[str, Any]], kpi: str) -> Tuple[Optional[ChartData], Omitted]:
    return _level_chart(entries, kpi, 'notched_box', 'box')


def violin_chart(entries: List[Dict[str, Any]], kpi: str) -> Tuple[Optional[ChartData], Omitted]:
    return _level_chart(entries, kpi, 'violin', 'violin')


def _level_chart(entries: List[Dict[str, Any]], kpi: str, kind: str, suffix: str) \
        -> Tuple[Optional[ChartData], Omitted]:
    metric = CATEGORY_METRIC[kpi]
    scale = BOX_SCALES.get(kpi, 'linear')
    inputs, omitted = [], []
    for entry in sorted(entries, key=lambda e: e['dao_id']):
        value = metric_value(entry, metric)
        if _level(entry, kpi) == NOT_ASSESSABLE:
            omitted.append((entry['dao_id'], f'{kpi} not assessable'))
        elif value is None:
            omitted.append((entry['dao_id'], f'{metric} missing'))
        elif scale == 'log10' and value <= 0:
            omitted.append((entry['dao_id'], 'nonpositive value on log axis'))
        else:
            inputs.append({'dao_id': entry['dao_id'], 'group': _level(entry, kpi), 'value': value})
    if not inputs:
        return None, omitted
    chart = make_chart(kind, inputs, name=f'{kpi}_{suffix}', title=f'{AXIS_LABELS[metric]} by {kpi} level',
                       x_label=f'{kpi.capitalize()} level', y_label=AXIS_LABELS[metric], y_scale=scale,
                       groups=LEVEL_ORDER[kpi])
    chart.omitted = omitted
    return chart, omitted


def radar_values(assessment: Dict[str, Any]) -> List[float]:
    return [float(Decimal(assessment[kpi]['score']) / MAX_SCORE) for kpi in KPI_NAMES]


def select_radar_daos(entries: List[Dict[str, Any]], radar_daos: Optional[Sequence[str]] = None) -> List[str]:
    """ The requested DAOs, or else the RADAR_DEFAULT_COUNT best composites (ties by dao_id). """
    if radar_daos:
        known = {e['dao_id'] for e in entries}
        unknown = [d for d in radar_daos if d not in known]
        if unknown:
            raise ArgumentError(f'Unknown DAOs requested for radar chart: {", ".join(unknown)}')
        return list(radar_daos)
    scored = [e for e in entries if e['assessment']['composite'] is not None]
    scored.sort(key=lambda e: (-Decimal(e['assessment']['composite']), e['dao_id']))
    return [e['dao_id'] for e in scored[:RADAR_DEFAULT_COUNT]]


def radar_chart(entries: List[Dict[str, Any]], radar_daos: Optional[Sequence[str]] = None) \
        -> Tuple[Optional[ChartData], Omitted]:
    by_id = {e['dao_id']: e for e in entries}
    inputs, omitted = [], []
    for dao_id in select_radar_daos(entries, radar_daos):
        assessment = by_id[dao_id]['assessment']
        missing = [kpi for kpi in KPI_NAMES if assessment[kpi]['score'] is None]
        if missing:
            omitted.append((dao_id, f'{", ".join(missing)} not assessable'))
            continue
        inputs.append({'dao_id': dao_id, 'values': radar_values(assessment)})
    if not inputs:
        return None, omitted
    chart = make_chart('radar', inputs, name='composite_radar', title='KPI scores (score / 3)',
                       axes=[kpi.capitalize() for kpi in KPI_NAMES])
    chart.omitted = omitted
    return chart, omitted


def build_charts(entries: List[Dict[str, Any]], radar_daos: Optional[Sequence[str]] = None) \
        -> Tuple[List[ChartData], List[Tuple[str, str, str]]]:
    """
    Returns
    -------
    charts: list[ChartData]
        Scatter, box and violin per KPI, then the radar; charts with no plottable DAO are left out.
    omissions: list[tuple[str, str, str]]
        (chart name, dao_id, reason) for every DAO excluded from a chart.
    """
    charts, omissions = [], []
    builders = [(f'{kpi}_{kind}', builder, kpi) for kpi in KPI_NAMES
                for kind, builder in (('scatter', scatter_chart), ('box', box_chart), ('violin', violin_chart))]
    for name, builder, kpi in builders:
        try:
            chart, omitted = builder(entries, kpi)
        except DaoKpiError as e:
            raise ArgumentError(f'Chart {name}: {e}') from e
        omissions.extend((name, dao_id, reason) for dao_id, reason in omitted)
        if chart is not None:
            charts.append(chart)
    chart, omitted = radar_chart(entries, radar_daos)
    omissions.extend(('composite_radar', dao_id, reason) for dao_id, reason in omitted)
    if chart is not None:
        charts.append(chart)
    return charts, omissions

"""
Write a report bundle to disk.

Output tree (names are stable):
  kpi_summary.csv    one row per DAO
  stat_tests.csv     one row per gate, omnibus, post-hoc and correlation test
  omissions.csv      DAOs left out of a chart and why
  bundle.json        the whole bundle
  charts/<name>.svg  one file per chart
"""
import logging
from decimal import Decimal
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import pandas as pd

from dao_kpi.errors import ArgumentError
from dao_kpi.harmonize.dataset import dump_json
from dao_kpi.kpi_engine.kpi_config import KPI_NAMES
from dao_kpi.report.charts import build_charts
from dao_kpi.report.data_utils import ReportBundle
from dao_kpi.report.render import render_svg
from dao_kpi.report.summary import summarize_ecosystem


FORMATS = ('csv', 'json', 'svg')
FORMAT_ALIASES = {'structured-document': 'json'}
SIGNIFICANT_DIGITS = 6
FLOAT_FORMAT = f'%.{SIGNIFICANT_DIGITS}g'

KPI_SUMMARY_NAME = 'kpi_summary.csv'
STAT_TESTS_NAME = 'stat_tests.csv'
OMISSIONS_NAME = 'omissions.csv'
BUNDLE_NAME = 'bundle.json'
CHART_DIR = 'charts'

SUMMARY_METRICS = ('participation_rate', 'total_members', 'active_members', 'treasury_usd', 'circulating_pct',
                   'approval_rate', 'avg_duration_days', 'total_proposals', 'largest_holder_share',
                   'proposer_concentration', 'fully_automated')


def parse_formats(formats: Iterable[str]) -> List[str]:
    parsed = []
    for name in formats:
        name = FORMAT_ALIASES.get(name.strip(), name.strip())
        if name not in FORMATS:
            raise ArgumentError(f'Unknown output format "{name}"; expected one of {", ".join(FORMATS)}')
        if name not in parsed:
            parsed.append(name)
    return parsed


def round_sig(value: Any) -> Any:
    """ Round every float in a JSON-like structure to SIGNIFICANT_DIGITS. """
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        return float(f'{value:.{SIGNIFICANT_DIGITS}g}')
    if isinstance(value, dict):
        return {k: round_sig(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_sig(v) for v in value]
    return value


def build_bundle(entries: List[Dict[str, Any]], stat_report: Dict[str, Any],
                 radar_daos: Optional[Sequence[str]] = None) -> ReportBundle:
    entries = sorted(entries, key=lambda e: e['dao_id'])
    charts, omissions = build_charts(entries, radar_daos)
    return ReportBundle(summary=summarize_ecosystem(entries, stat_report), entries=entries,
                        stat_report=stat_report, charts=charts, omissions=omissions)


def _number(value: Any) -> Any:
    if isinstance(value, str):
        return float(Decimal(value))
    return value


def kpi_summary_table(bundle: ReportBundle) -> pd.DataFrame:
    rows = []
    for entry in bundle.entries:
        row = {'dao_id': entry['dao_id'], 'chain_id': entry['chain_id'], 'activity_tier': entry['activity_tier']}
        row.update({name: _number(entry['metrics'].get(name)) for name in SUMMARY_METRICS})
        for kpi in KPI_NAMES:
            row[f'{kpi}_level'] = entry['assessment'][kpi]['level']
            row[f'{kpi}_score'] = _number(entry['assessment'][kpi]['score'])
        row['composite'] = _number(entry['assessment']['composite'])
        rows.append(row)
    return pd.DataFrame(rows)


def _test_row(scope: str, step: str, result: Optional[Dict[str, Any]], detail: str = '') -> Dict[str, Any]:
    row = {'scope': scope, 'step': step, 'test': None, 'statistic': None, 'p_value': None, 'df': None,
           'detail': detail}
    if result is not None:
        row.update({
            'test': result['test_name'],
            'statistic': result['statistic'],
            'p_value': result['p_value'],
            'df': None if result['df'] is None else ' '.join(f'{d:g}' for d in result['df']),
        })
    return row


def stat_tests_table(stat_report: Dict[str, Any]) -> pd.DataFrame:
    rows = []
    for kpi, plan in stat_report['kpi_tests'].items():
        if 'skipped' in plan:
            rows.append(_test_row(kpi, 'skipped', None, plan['skipped']))
            continue
        for check in plan['normality']:
            rows.append(_test_row(kpi, f'normality:{check["label"]}', check['result'],
                                  check['status'] + (f' ({check["reason"]})' if check['reason'] else '')))
        homogeneity = plan['homogeneity']
        rows.append(_test_row(kpi, 'homogeneity', homogeneity['result'],
                              homogeneity['status'] + (f' ({homogeneity["reason"]})' if homogeneity['reason'] else '')))
        rows.append(_test_row(kpi, 'omnibus', plan['omnibus'], ' '.join(plan['rules'])))
        for result in plan['posthoc']:
            rows.append(_test_row(kpi, f'posthoc:{result["meta"]["group_a"]}-{result["meta"]["group_b"]}', result))
    for item in stat_report['correlations']:
        step = f'{item["x"]}~{item["y"]}'
        rows.append(_test_row(item['name'], step, item.get('result'), item.get('skipped', f'n = {item["n"]}')))
    return pd.DataFrame(rows, columns=['scope', 'step', 'test', 'statistic', 'p_value', 'df', 'detail'])


def omissions_table(bundle: ReportBundle) -> pd.DataFrame:
    return pd.DataFrame(bundle.omissions, columns=['chart', 'dao_id', 'reason'])


def _write_csv(df: pd.DataFrame, path: Path) -> Path:
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    return path


def emit(bundle: ReportBundle, output_dir: Path, formats: Iterable[str] = FORMATS) -> List[Path]:
    """
    Parameters
    ----------
    bundle: ReportBundle
    output_dir: pathlib.Path
        Created when missing; an unwritable location raises OSError.
    formats: Iterable[str]
        Any of csv, json (alias structured-document) and svg.

    Returns
    -------
    written: list[pathlib.Path]
    """
    formats = parse_formats(formats)
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if 'csv' in formats:
        written.append(_write_csv(kpi_summary_table(bundle), output_dir / KPI_SUMMARY_NAME))
        written.append(_write_csv(stat_tests_table(bundle.stat_report), output_dir / STAT_TESTS_NAME))
        written.append(_write_csv(omissions_table(bundle), output_dir / OMISSIONS_NAME))
    if 'json' in formats:
        path = output_dir / BUNDLE_NAME
        dump_json(round_sig(bundle.to_dict()), path)
        written.append(path)
    if 'svg' in formats:
        chart_dir = output_dir / CHART_DIR
        chart_dir.mkdir(exist_ok=True)
        for chart in bundle.charts:
            written.append(render_svg(chart, chart_dir / f'{chart.name}.svg'))
    logging.info(f'Wrote {len(written)} report files to {output_dir}')
    return written

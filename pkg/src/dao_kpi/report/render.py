"""Draw ChartData as self-contained SVG with matplotlib."""
from pathlib import Path

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np

from dao_kpi.report.data_utils import ChartData


# SVG output must be byte-stable between runs
SVG_RC = {
    'svg.hashsalt': 'dao-kpi',
    'svg.fonttype': 'path',
    'svg.image_inline': True,
    'font.family': 'DejaVu Sans',
}
SVG_METADATA = {'Date': None, 'Creator': 'dao-kpi'}
FIGSIZE = (7.0, 5.0)
PALETTE = plt.get_cmap('tab10').colors


def _threshold_lines(ax, chart: ChartData):
    for axis, lines in chart.thresholds.items():
        for label, value in lines:
            if axis == 'x':
                ax.axvline(value, color='grey', linestyle='--', linewidth=0.8)
                ax.annotate(label, (value, 1.0), xycoords=('data', 'axes fraction'), fontsize=7,
                            ha='left', va='bottom', color='grey')
            else:
                ax.axhline(value, color='grey', linestyle='--', linewidth=0.8)
                ax.annotate(label, (1.0, value), xycoords=('axes fraction', 'data'), fontsize=7,
                            ha='left', va='center', color='grey')


def _draw_scatter(ax, chart: ChartData):
    for i, series in enumerate(chart.series):
        xs = [x for _, x, _ in series.points]
        ys = [y for _, _, y in series.points]
        ax.scatter(xs, ys, s=18, color=PALETTE[i % len(PALETTE)], label=series.label)
    if chart.fit is not None:
        (x0, y0), (x1, y1) = chart.fit['ends']
        ax.plot([x0, x1], [y0, y1], color='black', linewidth=1, label='Least-squares fit')
    _threshold_lines(ax, chart)
    if chart.x_scale == 'log10':
        ax.set_xscale('log')
    if chart.y_scale == 'log10':
        ax.set_yscale('log')
    ax.legend(fontsize=8, loc='best')


def _draw_box(ax, chart: ChartData):
    # glyphs come straight from the stored box statistics
    stats = [{
        'label': f'{s.label}\n(n={s.box["n"]})',
        'med': s.box['median'],
        'q1': s.box['q1'],
        'q3': s.box['q3'],
        'whislo': s.box['whisker_low'],
        'whishi': s.box['whisker_high'],
        'cilo': s.box['notch_low'],
        'cihi': s.box['notch_high'],
        'fliers': s.box['outliers'],
    } for s in chart.series]
    ax.bxp(stats, shownotches=True, showfliers=True, patch_artist=True,
           boxprops={'facecolor': PALETTE[0], 'alpha': 0.5})
    if chart.y_scale == 'log10':
        ax.set_yscale('log')


def _draw_violin(ax, chart: ChartData):
    # outlines come straight from the stored densities
    stats = [{
        'coords': s.density['coords'],
        'vals': s.density['vals'],
        'mean': s.density['mean'],
        'median': s.density['median'],
        'min': s.density['min'],
        'max': s.density['max'],
    } for s in chart.series]
    ax.violin(stats, showmedians=True)
    ax.set_xticks(range(1, len(chart.series) + 1))
    ax.set_xticklabels([f'{s.label}\n(n={len(s.values)})' for s in chart.series])
    if chart.y_scale == 'log10':
        ax.set_yscale('log')


def _draw_radar(fig, chart: ChartData):
    ax = fig.add_subplot(projection='polar')
    angles = np.linspace(0, 2 * np.pi, len(chart.axes), endpoint=False).tolist()
    for i, series in enumerate(chart.series):
        color = PALETTE[i % len(PALETTE)]
        values = list(series.values) + [series.values[0]]
        ax.plot(angles + angles[:1], values, color=color, linewidth=1, label=series.label)
        ax.fill(angles + angles[:1], values, color=color, alpha=0.1)
    ax.set_xticks(angles)
    ax.set_xticklabels(chart.axes, fontsize=8)
    ax.set_ylim(0, 1)
    ax.set_yticks([0.25, 0.5, 0.75, 1.0])
    ax.legend(fontsize=7, loc='upper right', bbox_to_anchor=(1.3, 1.1))
    return ax


def render_svg(chart: ChartData, path: Path) -> Path:
    path = Path(path)
    with plt.rc_context(SVG_RC):
        fig = plt.figure(figsize=FIGSIZE)
        try:
            if chart.chart_kind == 'radar':
                ax = _draw_radar(fig, chart)
            else:
                ax = fig.add_subplot()
                if chart.chart_kind == 'scatter_threshold':
                    _draw_scatter(ax, chart)
                elif chart.chart_kind == 'violin':
                    _draw_violin(ax, chart)
                else:
                    _draw_box(ax, chart)
                ax.set_xlabel(chart.x_label)
                ax.set_ylabel(chart.y_label)
            ax.set_title(chart.title)
            fig.tight_layout()
            fig.savefig(path, format='svg', metadata=SVG_METADATA)
        finally:
            plt.close(fig)
    return path

import numpy as np

from dao_kpi.errors import InsufficientSampleError
from dao_kpi.stats.data_utils import BoxStats


WHISKER_IQR = 1.5
NOTCH_FACTOR = 1.57


def box_stats(x) -> BoxStats:
    """
    Notched box summary.

    Quartiles use linear interpolation between order statistics (numpy's default);
    whiskers reach the most extreme values within 1.5 IQR of the box and the notch
    spans median +/- 1.57 IQR / sqrt(n).
    """
    x = np.sort(np.asarray(x, dtype=float))
    n = len(x)
    if n < 1:
        raise InsufficientSampleError('box_stats needs at least one value')
    q1, median, q3 = (float(v) for v in np.percentile(x, [25, 50, 75]))
    iqr = q3 - q1
    low_fence, high_fence = q1 - WHISKER_IQR * iqr, q3 + WHISKER_IQR * iqr
    inside = x[(x >= low_fence) & (x <= high_fence)]
    half_notch = NOTCH_FACTOR * iqr / np.sqrt(n)
    return BoxStats(
        n=n,
        median=median,
        q1=q1,
        q3=q3,
        iqr=iqr,
        whisker_low=float(inside.min()),
        whisker_high=float(inside.max()),
        notch_low=median - half_notch,
        notch_high=median + half_notch,
        outliers=tuple(float(v) for v in x[(x < low_fence) | (x > high_fence)]),
    )

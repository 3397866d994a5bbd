"""Expected KPI levels of a synthetic DAO, worked out from the generator's own counts.

Thresholds are restated here as exact fractions; nothing is shared with kpi_engine.
"""
from decimal import Decimal
from fractions import Fraction
from typing import Dict, Optional, Tuple


NOT_ASSESSABLE = 'NotAssessable'

# (upper bound, bound included, level); the last row has no bound
PARTICIPATION_BANDS = (
    (Fraction(1, 10), False, 'Low'),
    (Fraction(2, 5), True, 'Medium'),
    (None, True, 'High'),
)
APPROVAL_BANDS = (
    (Fraction(3, 10), False, 'Low'),
    (Fraction(7, 10), True, 'Medium'),
    (None, True, 'High'),
)
WINDOW_DAYS = (Fraction(3), Fraction(14))
FUNDS_USD = (Decimal('100000000'), Decimal('1000000000'))
CIRCULATING_HALF = Fraction(1, 2)
HOLDER_SHARE = (Fraction(1, 10), Fraction(33, 100), Fraction(66, 100))

SCORE_TABLE = {
    'participation': {'Low': '1', 'Medium': '2', 'High': '3'},
    'funds': {'Low': '0.75', 'Medium-Low': '1.5', 'Medium-High': '2.25', 'High': '3'},
    'voting': {'Low': '1', 'Medium': '2', 'High': '3'},
    'decentralisation': {'Low': '0.6', 'Medium-Low': '1.2', 'Medium': '1.8', 'Medium-High': '2.4', 'High': '3'},
}


def _band(value: Fraction, bands) -> str:
    for bound, included, level in bands:
        if bound is None or value < bound or (included and value == bound):
            return level
    raise AssertionError('bands end with an unbounded row')


def participation_level(active: int, members: int) -> str:
    if members == 0:
        return NOT_ASSESSABLE
    return _band(Fraction(active, members), PARTICIPATION_BANDS)


def funds_level(treasury_usd: Optional[Decimal], circulating: int, total_supply: int) -> str:
    if treasury_usd is None:
        return NOT_ASSESSABLE
    low, high = FUNDS_USD
    if treasury_usd < low:
        return 'Low'
    if treasury_usd > high:
        return 'High'
    share = Fraction(circulating, total_supply) if total_supply > 0 else Fraction(0)
    return 'Medium-High' if share > CIRCULATING_HALF else 'Medium-Low'


def voting_level(approved: int, proposals: int, total_duration_seconds: int) -> str:
    if proposals == 0:
        return NOT_ASSESSABLE
    days = Fraction(total_duration_seconds, proposals * 86_400)
    if not WINDOW_DAYS[0] <= days <= WINDOW_DAYS[1]:
        return 'Low'
    return _band(Fraction(approved, proposals), APPROVAL_BANDS)


def decentralisation_level(largest: int, circulating: int, participation: str, automated: bool) -> str:
    share = Fraction(largest, circulating) if circulating > 0 else Fraction(0)
    high_below, medium_below, low_from = HOLDER_SHARE
    if share >= low_from:
        return 'Low'
    if share >= medium_below:
        return 'Medium-Low'
    if share < high_below:
        return 'High'
    if participation in ('Medium', 'High'):
        return 'Medium-High' if automated else 'Medium'
    return 'Medium-Low'


def expected_kpis(active: int, members: int, treasury_usd: Optional[Decimal], circulating: int, total_supply: int,
                  approved: int, proposals: int, total_duration_seconds: int, largest: int,
                  automated: bool) -> Tuple[Dict[str, str], Dict[str, Optional[str]], Optional[str]]:
    """
    Returns
    -------
    levels, scores, composite
        Scores and composite as decimal strings; composite is None when any KPI is not assessable.
    """
    participation = participation_level(active, members)
    levels = {
        'participation': participation,
        'funds': funds_level(treasury_usd, circulating, total_supply),
        'voting': voting_level(approved, proposals, total_duration_seconds),
        'decentralisation': decentralisation_level(largest, circulating, participation, automated),
    }
    scores = {kpi: SCORE_TABLE[kpi].get(level) for kpi, level in levels.items()}
    if any(score is None for score in scores.values()):
        return levels, scores, None
    return levels, scores, str(sum((Decimal(score) for score in scores.values()), Decimal(0)))

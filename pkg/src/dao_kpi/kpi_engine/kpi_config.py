"""Level boundaries and scores of the four sustainability KPIs.

Single source for KPI classification and for the threshold lines drawn on charts.
"""
from decimal import Decimal


NOT_ASSESSABLE = 'NotAssessable'

LOW = 'Low'
MEDIUM_LOW = 'Medium-Low'
MEDIUM = 'Medium'
MEDIUM_HIGH = 'Medium-High'
HIGH = 'High'

KPI_NAMES = ('participation', 'funds', 'voting', 'decentralisation')

# Network participation: active members / total members
PARTICIPATION_LOW_BELOW = 0.10
PARTICIPATION_HIGH_ABOVE = 0.40
PARTICIPATION_SCORES = {
    LOW: Decimal('1'),
    MEDIUM: Decimal('2'),
    HIGH: Decimal('3'),
}

# Accumulated funds: treasury in USD, split by circulating share in the middle band
TREASURY_LOW_BELOW_USD = Decimal('100000000')
TREASURY_HIGH_ABOVE_USD = Decimal('1000000000')
CIRCULATING_SPLIT = 0.5
FUNDS_SCORES = {
    LOW: Decimal('0.75'),
    MEDIUM_LOW: Decimal('1.5'),
    MEDIUM_HIGH: Decimal('2.25'),
    HIGH: Decimal('3'),
}

# Voting mechanism efficiency: approval rate and mean voting window
APPROVAL_LOW_BELOW = 0.30
APPROVAL_HIGH_ABOVE = 0.70
DURATION_MIN_DAYS = 3
DURATION_MAX_DAYS = 14
VOTING_SCORES = {
    LOW: Decimal('1'),
    MEDIUM: Decimal('2'),
    HIGH: Decimal('3'),
}

# Decentralisation: largest non-treasury holder share
HOLDER_HIGH_BELOW = 0.10
HOLDER_MEDIUM_BELOW = 0.33
HOLDER_LOW_FROM = 0.66
DECENTRALISATION_SCORES = {
    LOW: Decimal('0.6'),
    MEDIUM_LOW: Decimal('1.2'),
    MEDIUM: Decimal('1.8'),
    MEDIUM_HIGH: Decimal('2.4'),
    HIGH: Decimal('3'),
}

SCORES = {
    'participation': PARTICIPATION_SCORES,
    'funds': FUNDS_SCORES,
    'voting': VOTING_SCORES,
    'decentralisation': DECENTRALISATION_SCORES,
}
SCORE_SET = frozenset(score for table in SCORES.values() for score in table.values())

COMPOSITE_MIN = sum(min(table.values()) for table in SCORES.values())
COMPOSITE_MAX = sum(max(table.values()) for table in SCORES.values())

# Level order per KPI, lowest first; used for monotonicity checks and chart grouping
LEVEL_ORDER = {kpi: tuple(sorted(table, key=table.get)) for kpi, table in SCORES.items()}

# Threshold lines per chart, straight from the boundaries above
CHART_THRESHOLDS = {
    'participation': {'y': (PARTICIPATION_LOW_BELOW, PARTICIPATION_HIGH_ABOVE)},
    'funds': {'x': (float(TREASURY_LOW_BELOW_USD), float(TREASURY_HIGH_ABOVE_USD)), 'y': (CIRCULATING_SPLIT,)},
    'voting': {'x': (APPROVAL_LOW_BELOW, APPROVAL_HIGH_ABOVE), 'y': (DURATION_MIN_DAYS, DURATION_MAX_DAYS)},
    'decentralisation': {'x': (HOLDER_HIGH_BELOW, HOLDER_MEDIUM_BELOW, HOLDER_LOW_FROM),
                         'y': (PARTICIPATION_LOW_BELOW, PARTICIPATION_HIGH_ABOVE)},
}

from typing import Iterable

from dao_kpi.harmonize.data_utils import SECONDS_PER_DAY, ActivityTier, DaoRecord


HIGHLY_ACTIVE_WINDOW_DAYS = 30
HIGHLY_ACTIVE_MIN_EVENTS = 5
MODERATELY_ACTIVE_WINDOW_DAYS = 90
DORMANT_MAX_EVENTS = 1 # fewer than 2 governance transactions since creation


def classify_timeline(timestamps: Iterable[int], now: int) -> ActivityTier:
    """ Tier of a governance timeline (proposal, vote, queue, execute and cancel times) as seen at `now`. """
    past = [t for t in timestamps if t <= now]
    recent_30 = sum(1 for t in past if t > now - HIGHLY_ACTIVE_WINDOW_DAYS * SECONDS_PER_DAY)
    recent_90 = sum(1 for t in past if t > now - MODERATELY_ACTIVE_WINDOW_DAYS * SECONDS_PER_DAY)
    if recent_30 >= HIGHLY_ACTIVE_MIN_EVENTS:
        return ActivityTier.HIGHLY_ACTIVE
    if recent_90 >= 1:
        return ActivityTier.MODERATELY_ACTIVE
    if len(past) <= DORMANT_MAX_EVENTS:
        return ActivityTier.TEST_OR_DORMANT
    return ActivityTier.MINIMALLY_ACTIVE


def classify_activity(record: DaoRecord, now: int) -> ActivityTier:
    return classify_timeline(record.activity_timestamps, now)

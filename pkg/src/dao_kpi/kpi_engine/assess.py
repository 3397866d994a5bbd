"""Classify KPI metrics into levels and scores."""
from decimal import Decimal
from typing import Dict, Optional

from dao_kpi.kpi_engine import kpi_config as cfg
from dao_kpi.kpi_engine.data_utils import (DecentralisationMetrics, KpiAssessment, KpiResult, ParticipationMetrics,
                                           TreasuryMetrics, VotingMetrics)


def _result(kpi: str, level: str) -> KpiResult:
    return KpiResult(level=level, score=cfg.SCORES[kpi][level])


def assess_participation(m: ParticipationMetrics) -> KpiResult:
    rate = m.rate
    if rate is None:
        return KpiResult.not_assessable('no token holders at snapshot')
    if rate < cfg.PARTICIPATION_LOW_BELOW:
        return _result('participation', cfg.LOW)
    if rate <= cfg.PARTICIPATION_HIGH_ABOVE:
        return _result('participation', cfg.MEDIUM)
    return _result('participation', cfg.HIGH)


def assess_funds(m: TreasuryMetrics) -> KpiResult:
    if m.treasury_usd is None:
        return KpiResult.not_assessable('no treasury valuation configured')
    if m.treasury_usd < cfg.TREASURY_LOW_BELOW_USD:
        return _result('funds', cfg.LOW)
    if m.treasury_usd > cfg.TREASURY_HIGH_ABOVE_USD:
        return _result('funds', cfg.HIGH)
    if m.circulating_pct <= cfg.CIRCULATING_SPLIT:
        return _result('funds', cfg.MEDIUM_LOW)
    return _result('funds', cfg.MEDIUM_HIGH)


def assess_voting(m: VotingMetrics) -> KpiResult:
    """ Windows outside [3, 14] days are Low whatever the approval rate. """
    approval, duration = m.approval_rate, m.avg_duration_days
    if approval is None:
        return KpiResult.not_assessable('no proposals')
    if approval < cfg.APPROVAL_LOW_BELOW or not cfg.DURATION_MIN_DAYS <= duration <= cfg.DURATION_MAX_DAYS:
        return _result('voting', cfg.LOW)
    if approval <= cfg.APPROVAL_HIGH_ABOVE:
        return _result('voting', cfg.MEDIUM)
    return _result('voting', cfg.HIGH)


def assess_decentralisation(m: DecentralisationMetrics) -> KpiResult:
    share = m.largest_holder_share
    if share >= cfg.HOLDER_LOW_FROM:
        return _result('decentralisation', cfg.LOW)
    if share >= cfg.HOLDER_MEDIUM_BELOW:
        return _result('decentralisation', cfg.MEDIUM_LOW)
    if share < cfg.HOLDER_HIGH_BELOW:
        return _result('decentralisation', cfg.HIGH)
    if m.participation_level in (cfg.MEDIUM, cfg.HIGH):
        return _result('decentralisation', cfg.MEDIUM_HIGH if m.fully_automated else cfg.MEDIUM)
    # unclassified middle band with low participation
    return _result('decentralisation', cfg.MEDIUM_LOW)


def composite(results: Dict[str, KpiResult]) -> Optional[Decimal]:
    """ Sum of the four scores; absent as soon as one KPI is not assessable. """
    if any(not results[name].assessable for name in cfg.KPI_NAMES):
        return None
    return sum((results[name].score for name in cfg.KPI_NAMES), Decimal(0))


def assess_all(participation: ParticipationMetrics, treasury: TreasuryMetrics, voting: VotingMetrics,
               largest_holder_share: float, fully_automated: bool) -> KpiAssessment:
    results = {
        'participation': assess_participation(participation),
        'funds': assess_funds(treasury),
        'voting': assess_voting(voting),
    }
    results['decentralisation'] = assess_decentralisation(DecentralisationMetrics(
        largest_holder_share=largest_holder_share,
        participation_level=results['participation'].level,
        fully_automated=fully_automated,
    ))
    return KpiAssessment(**results, composite=composite(results))

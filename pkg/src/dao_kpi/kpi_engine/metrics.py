"""Derive KPI metrics from a harmonised record and attach the assessment to its document."""
from typing import Any, Dict, Tuple

from dao_kpi.harmonize.data_utils import DaoRecord, Outcome
from dao_kpi.kpi_engine.assess import assess_all
from dao_kpi.kpi_engine.data_utils import KpiAssessment, ParticipationMetrics, TreasuryMetrics, VotingMetrics


def participation_metrics(record: DaoRecord) -> ParticipationMetrics:
    return ParticipationMetrics(active_members=record.active_members, total_members=record.total_members)


def treasury_metrics(record: DaoRecord) -> TreasuryMetrics:
    return TreasuryMetrics(treasury_usd=record.treasury_usd, total_supply=record.total_supply,
                           circulating_supply=record.circulating_supply)


def voting_metrics(record: DaoRecord) -> VotingMetrics:
    """ Every proposal counts in the denominator; only approved ones in the numerator. """
    return VotingMetrics(
        approved=sum(1 for p in record.proposals if p.outcome == Outcome.APPROVED),
        total_proposals=len(record.proposals),
        total_duration_seconds=sum(p.duration_seconds for p in record.proposals),
    )


def assess_record(record: DaoRecord) -> Tuple[Dict[str, Any], KpiAssessment]:
    """
    Returns
    -------
    metrics: dict
        The plotted and tested values: participation_rate, treasury_usd, circulating_pct,
        approval_rate, avg_duration_days, largest_holder_share, proposer_concentration,
        total_members, total_proposals. Values that cannot be computed are None.
    assessment: KpiAssessment
    """
    participation = participation_metrics(record)
    treasury = treasury_metrics(record)
    voting = voting_metrics(record)
    assessment = assess_all(participation, treasury, voting, record.largest_holder_share, record.fully_automated)
    metrics = {
        'participation_rate': participation.rate,
        'treasury_usd': None if treasury.treasury_usd is None else str(treasury.treasury_usd),
        'circulating_pct': treasury.circulating_pct,
        'approval_rate': voting.approval_rate,
        'avg_duration_days': voting.avg_duration_days,
        'largest_holder_share': record.largest_holder_share,
        'proposer_concentration': record.proposer_concentration,
        'total_members': record.total_members,
        'active_members': record.active_members,
        'total_proposals': voting.total_proposals,
        'fully_automated': record.fully_automated,
    }
    return metrics, assessment


def kpi_section(record: DaoRecord) -> Dict[str, Any]:
    metrics, assessment = assess_record(record)
    return {'metrics': metrics, 'assessment': assessment.to_dict()}

from decimal import Decimal

import pytest

from dao_kpi.errors import DataIntegrityError
from dao_kpi.harmonize.data_utils import DaoRecord, Outcome, ProposalSummary
from dao_kpi.kpi_engine import kpi_config as cfg
from dao_kpi.kpi_engine.assess import (assess_all, assess_decentralisation, assess_funds, assess_participation,
                                       assess_voting, composite)
from dao_kpi.kpi_engine.data_utils import (DecentralisationMetrics, KpiAssessment, KpiResult, ParticipationMetrics,
                                           TreasuryMetrics, VotingMetrics)
from dao_kpi.kpi_engine.metrics import kpi_section


DAY = 86_400


@pytest.mark.parametrize('active, total, level', [
    (0, 100, cfg.LOW),
    (9, 100, cfg.LOW),
    (10, 100, cfg.MEDIUM),
    (25, 100, cfg.MEDIUM),
    (40, 100, cfg.MEDIUM),
    (41, 100, cfg.HIGH),
    (100, 100, cfg.HIGH),
    (0, 0, cfg.NOT_ASSESSABLE),
])
def test_participation_levels(active, total, level):
    assert assess_participation(ParticipationMetrics(active, total)).level == level


@pytest.mark.parametrize('active, total', [(150, 100), (3, 0), (-1, 10)])
def test_participation_rejects_more_active_than_members(active, total):
    with pytest.raises(DataIntegrityError):
        ParticipationMetrics(active, total)


@pytest.mark.parametrize('usd, circulating, level', [
    ('0', 50, cfg.LOW),
    ('99999999.99', 90, cfg.LOW),
    ('100000000', 50, cfg.MEDIUM_LOW),
    ('100000000', 51, cfg.MEDIUM_HIGH),
    ('500000000', 10, cfg.MEDIUM_LOW),
    ('500000000', 90, cfg.MEDIUM_HIGH),
    ('1000000000', 50, cfg.MEDIUM_LOW),
    ('1000000000', 80, cfg.MEDIUM_HIGH),
    ('1000000000.01', 10, cfg.HIGH),
    ('5000000000', 90, cfg.HIGH),
    (None, 50, cfg.NOT_ASSESSABLE),
])
def test_funds_levels(usd, circulating, level):
    metrics = TreasuryMetrics(treasury_usd=None if usd is None else Decimal(usd), total_supply=100,
                              circulating_supply=circulating)
    assert assess_funds(metrics).level == level


@pytest.mark.parametrize('approved, total, days, level', [
    (2, 10, 5, cfg.LOW),
    (3, 10, 5, cfg.MEDIUM),
    (7, 10, 5, cfg.MEDIUM),
    (8, 10, 5, cfg.HIGH),
    (10, 10, 3, cfg.HIGH),
    (10, 10, 14, cfg.HIGH),
    (10, 10, 2.9, cfg.LOW),
    (10, 10, 14.1, cfg.LOW),
    (5, 10, 1, cfg.LOW),
    (0, 0, 0, cfg.NOT_ASSESSABLE),
])
def test_voting_levels(approved, total, days, level):
    metrics = VotingMetrics(approved=approved, total_proposals=total,
                            total_duration_seconds=round(days * DAY * total))
    assert assess_voting(metrics).level == level


@pytest.mark.parametrize('share, participation, automated, level', [
    (0.0, cfg.LOW, False, cfg.HIGH),
    (0.0999, cfg.LOW, False, cfg.HIGH),
    (0.10, cfg.MEDIUM, True, cfg.MEDIUM_HIGH),
    (0.20, cfg.HIGH, True, cfg.MEDIUM_HIGH),
    (0.20, cfg.MEDIUM, False, cfg.MEDIUM),
    (0.20, cfg.LOW, True, cfg.MEDIUM_LOW),
    (0.20, cfg.NOT_ASSESSABLE, True, cfg.MEDIUM_LOW),
    (0.33, cfg.HIGH, True, cfg.MEDIUM_LOW),
    (0.50, cfg.HIGH, True, cfg.MEDIUM_LOW),
    (0.66, cfg.HIGH, True, cfg.LOW),
    (1.0, cfg.MEDIUM, False, cfg.LOW),
])
def test_decentralisation_levels(share, participation, automated, level):
    assert assess_decentralisation(DecentralisationMetrics(share, participation, automated)).level == level


def test_scores_and_composite_bounds():
    assert cfg.COMPOSITE_MIN == Decimal('3.35')
    assert cfg.COMPOSITE_MAX == Decimal('12')
    for kpi, table in cfg.SCORES.items():
        ordered = [table[level] for level in cfg.LEVEL_ORDER[kpi]]
        assert ordered == sorted(ordered)
        assert max(ordered) == Decimal('3')


def test_composite_is_absent_when_any_kpi_is_not_assessable():
    results = {kpi: KpiResult(level=cfg.HIGH, score=Decimal('3')) for kpi in cfg.KPI_NAMES}
    assert composite(results) == Decimal('12')
    results['funds'] = KpiResult.not_assessable('no treasury valuation configured')
    assert composite(results) is None


def test_assess_all_feeds_participation_into_decentralisation():
    assessment = assess_all(ParticipationMetrics(50, 100),
                            TreasuryMetrics(Decimal('200000000'), 100, 30),
                            VotingMetrics(approved=5, total_proposals=10, total_duration_seconds=50 * DAY),
                            largest_holder_share=0.2, fully_automated=True)
    assert assessment.participation.level == cfg.HIGH
    assert assessment.funds.level == cfg.MEDIUM_LOW
    assert assessment.voting.level == cfg.MEDIUM
    assert assessment.decentralisation.level == cfg.MEDIUM_HIGH
    assert assessment.composite == Decimal('3') + Decimal('1.5') + Decimal('2') + Decimal('2.4')
    assert KpiAssessment.from_dict(assessment.to_dict()) == assessment


def _proposal(pid, outcome, days):
    return ProposalSummary(proposal_id=pid, proposer='0x' + '01' * 20, created_at=0, voting_start=100,
                           voting_end=100 + days * DAY, outcome=outcome, executed=False)


def test_kpi_section_counts_every_proposal_in_the_denominator():
    proposals = [_proposal(1, Outcome.APPROVED, 4), _proposal(2, Outcome.REJECTED, 4),
                 _proposal(3, Outcome.CANCELED, 4), _proposal(4, Outcome.PENDING, 4)]
    record = DaoRecord(dao_id='d', chain_id=1, snapshot_block=1, snapshot_timestamp=0, proposals=proposals,
                       voters=[], proposers=[], total_members=20, active_members=3, treasury_usd=None,
                       total_supply=1000, circulating_supply=400, largest_holder_share=0.05, fully_automated=False,
                       proposer_concentration=1.0)
    section = kpi_section(record)
    assert section['metrics']['approval_rate'] == 0.25
    assert section['metrics']['avg_duration_days'] == 4.0
    assert section['metrics']['treasury_usd'] is None
    assert section['assessment']['voting']['level'] == cfg.LOW
    assert section['assessment']['participation']['level'] == cfg.MEDIUM
    assert section['assessment']['funds']['level'] == cfg.NOT_ASSESSABLE
    assert section['assessment']['composite'] is None

import hashlib
import json
from decimal import Decimal

import hypothesis.strategies as st
import pytest
from hypothesis import given, settings

from dao_kpi.abi_codec.decode import DecodedEvent, DecodedParam
from dao_kpi.abi_codec.governance import (ProposalCanceled, ProposalCreated, ProposalExecuted, Support, TokenTransfer,
                                          VoteCast)
from dao_kpi.chain_access.data_utils import ZERO_ADDRESS, TokenMetadata
from dao_kpi.errors import ArgumentError, DataIntegrityError, StageError
from dao_kpi.git_utils import normalize_remote
from dao_kpi.harmonize.activity import classify_activity, classify_timeline
from dao_kpi.harmonize.balances import (circulating_supply, count_members, excluded_addresses, largest_holder_share,
                                        reconstruct_balances, replay_transfers)
from dao_kpi.harmonize.data_utils import (DEAD_ADDRESS, SECONDS_PER_DAY, ActivityTier, DaoRecord, Outcome, TreasuryEntry,
                                         ValidationReport)
from dao_kpi.harmonize.dataset import (harmonised_document, provenance, read_harmonised, record_of, write_harmonised,
                                      write_manifest)
from dao_kpi.harmonize.proposals import decide_outcome, summarize_proposals
from dao_kpi.harmonize.record import DaoInputs, build_dao_record, value_treasury
from dao_kpi.harmonize.validate import dedup_and_validate


HOLDERS = ['0x' + f'{i:02x}' * 20 for i in range(1, 6)]
TREASURY = '0x' + 'ee' * 20
NOW = 1_700_000_000


def _transfer(sender, recipient, amount, block, log_index=0):
    return TokenTransfer(sender=sender, recipient=recipient, amount=amount, block_number=block, log_index=log_index)


@st.composite
def transfer_histories(draw):
    """ Valid histories: mints first, then transfers and burns that never overdraw. """
    balances = {h: 0 for h in HOLDERS}
    transfers = []
    block = 1
    for holder in HOLDERS:
        amount = draw(st.integers(min_value=0, max_value=10 ** 24))
        if amount:
            transfers.append(_transfer(ZERO_ADDRESS, holder, amount, block, len(transfers)))
            balances[holder] += amount
    for _ in range(draw(st.integers(min_value=0, max_value=30))):
        block += draw(st.integers(min_value=0, max_value=3))
        sender = draw(st.sampled_from(HOLDERS))
        if balances[sender] == 0:
            continue
        amount = draw(st.integers(min_value=1, max_value=balances[sender]))
        recipient = draw(st.sampled_from(HOLDERS + [ZERO_ADDRESS, DEAD_ADDRESS]))
        log_index = sum(1 for t in transfers if t.block_number == block)
        transfers.append(_transfer(sender, recipient, amount, block, log_index))
        balances[sender] -= amount
        if recipient != ZERO_ADDRESS:
            balances[recipient] = balances.get(recipient, 0) + amount
    return transfers, block


@settings(max_examples=100, deadline=None)
@given(transfer_histories())
def test_balances_conserve_supply(history):
    transfers, last_block = history
    sheet = replay_transfers(transfers, last_block)
    assert sum(sheet.balances.values()) == sheet.minted - sheet.burned
    assert all(amount >= 0 for amount in sheet.balances.values())


@settings(max_examples=100, deadline=None)
@given(transfer_histories(), st.integers(min_value=0, max_value=100))
def test_incremental_replay_matches_full(history, split):
    transfers, last_block = history
    cut = min(split, last_block)
    partial = replay_transfers(transfers, cut)
    assert replay_transfers(transfers, last_block, start=partial).nonzero() == \
        replay_transfers(transfers, last_block).nonzero()


def test_overdraft_names_address_and_block():
    transfers = [_transfer(ZERO_ADDRESS, HOLDERS[0], 5, 1), _transfer(HOLDERS[0], HOLDERS[1], 6, 2)]
    with pytest.raises(DataIntegrityError, match=f'{HOLDERS[0]}.*block 2'):
        replay_transfers(transfers, 10)


def test_unsorted_transfers_are_rejected():
    transfers = [_transfer(ZERO_ADDRESS, HOLDERS[0], 5, 2), _transfer(ZERO_ADDRESS, HOLDERS[1], 5, 1)]
    with pytest.raises(ArgumentError):
        replay_transfers(transfers, 10)


def test_snapshot_cuts_later_transfers():
    transfers = [_transfer(ZERO_ADDRESS, HOLDERS[0], 5, 1), _transfer(HOLDERS[0], HOLDERS[1], 2, 9)]
    assert reconstruct_balances(transfers, 8) == {HOLDERS[0]: 5}
    assert reconstruct_balances(transfers, 9) == {HOLDERS[0]: 3, HOLDERS[1]: 2}


def test_supply_figures():
    balances = {TREASURY: 400, HOLDERS[0]: 300, HOLDERS[1]: 200, DEAD_ADDRESS: 100}
    excluded = excluded_addresses([TREASURY], [])
    circulating = circulating_supply(1000, balances, [TREASURY], [])
    assert circulating == 600
    assert count_members(balances, excluded) == 2
    assert largest_holder_share(balances, circulating, excluded) == pytest.approx(0.5)
    assert largest_holder_share({}, 0, excluded) == 0.0


def _event(block, log_index, tx='0x' + '01' * 32, timestamp=None):
    return DecodedEvent(event_name='Transfer', contract=TREASURY,
                        params=(DecodedParam('value', 'uint256', 1),), block_number=block, tx_hash=tx,
                        log_index=log_index, timestamp_utc=timestamp)


def test_dedup_and_timeline_checks():
    events = [_event(2, 0, timestamp=200), _event(1, 0, timestamp=100), _event(2, 0, timestamp=200),
              _event(3, 0, timestamp=150), _event(4, 0)]
    clean, report = dedup_and_validate(events)
    assert [e.block_number for e in clean] == [1, 2, 3, 4]
    assert report.events_in == 5
    assert report.duplicates == 1
    assert report.non_monotone_timestamps == 1
    assert report.missing_timestamps == 1


@pytest.mark.parametrize('executed, canceled, end, votes, quorum, expected', [
    (True, False, NOW + 10, (0, 5, 0), None, Outcome.APPROVED),
    (False, True, NOW - 10, (5, 0, 0), None, Outcome.CANCELED),
    (False, False, NOW + 10, (5, 0, 0), None, Outcome.PENDING),
    (False, False, NOW - 10, (5, 4, 0), None, Outcome.APPROVED),
    (False, False, NOW - 10, (4, 4, 0), None, Outcome.REJECTED),
    (False, False, NOW - 10, (5, 4, 0), 6, Outcome.REJECTED),
    (False, False, NOW - 10, (5, 4, 0), 5, Outcome.APPROVED),
])
def test_decide_outcome(executed, canceled, end, votes, quorum, expected):
    assert decide_outcome(executed, canceled, end, NOW, *votes, quorum=quorum) == expected


def test_abstain_counts_toward_quorum_when_configured():
    assert decide_outcome(False, False, NOW - 1, NOW, 5, 1, 3, quorum=8, quorum_includes_abstain=True) == \
        Outcome.APPROVED
    assert decide_outcome(False, False, NOW - 1, NOW, 5, 1, 3, quorum=8) == Outcome.REJECTED


def _created(pid, block, start, end, proposer=HOLDERS[0]):
    return ProposalCreated(proposal_id=pid, proposer=proposer, vote_start=start, vote_end=end, description='',
                           window_unit='block', block_number=block, log_index=0)


def _vote(pid, voter, support, weight, block, log_index=1):
    return VoteCast(voter=voter, proposal_id=pid, support=support, weight=weight, block_number=block,
                    log_index=log_index)


def test_summarize_proposals_links_lifecycle():
    timestamps = {b: NOW - 1000 + b for b in range(0, 200)}
    events = [
        _created(1, 10, 11, 20),
        _vote(1, HOLDERS[1], Support.FOR, 10, 12),
        _vote(1, HOLDERS[2], Support.AGAINST, 3, 13),
        _vote(9, HOLDERS[2], Support.FOR, 3, 14),
        ProposalExecuted(proposal_id=8, block_number=30, log_index=0),
        _created(2, 40, 41, 50),
        ProposalCanceled(proposal_id=2, block_number=45, log_index=0),
    ]
    report = ValidationReport()
    summaries = summarize_proposals(events, timestamps, NOW, report=report)
    assert [(s.proposal_id, s.outcome) for s in summaries] == [(1, Outcome.APPROVED), (2, Outcome.CANCELED)]
    assert summaries[0].duration_seconds == 9
    assert summaries[0].vote_count == 2
    assert report.orphan_votes == 1
    assert report.executions_without_creation == 1


@pytest.mark.parametrize('days_ago, expected', [
    ([1, 2, 3, 4, 5], ActivityTier.HIGHLY_ACTIVE),
    ([1, 2, 3, 4], ActivityTier.MODERATELY_ACTIVE),
    ([60], ActivityTier.MODERATELY_ACTIVE),
    ([200, 300], ActivityTier.MINIMALLY_ACTIVE),
    ([400], ActivityTier.TEST_OR_DORMANT),
    ([], ActivityTier.TEST_OR_DORMANT),
])
def test_activity_tiers(days_ago, expected):
    assert classify_timeline([NOW - d * SECONDS_PER_DAY for d in days_ago], NOW) == expected


def test_treasury_value():
    assert value_treasury(None) is None
    assert value_treasury([TreasuryEntry('ETH', Decimal('10'), Decimal('2500')),
                           TreasuryEntry('USDC', Decimal('1000'), Decimal('1'))]) == Decimal('26000')


def test_build_dao_record():
    transfers = [_transfer(ZERO_ADDRESS, TREASURY, 500, 1, 0), _transfer(ZERO_ADDRESS, HOLDERS[0], 300, 1, 1),
                 _transfer(ZERO_ADDRESS, HOLDERS[1], 200, 1, 2)]
    events = [_created(1, 10, 11, 20, proposer=HOLDERS[0]), _vote(1, HOLDERS[1], Support.FOR, 200, 12),
              ProposalExecuted(proposal_id=1, block_number=25, log_index=0)]
    timestamps = {b: NOW - 100_000 + b * 12 for b in range(0, 60)}
    inputs = DaoInputs(dao_id='tiny', chain_id=1, snapshot_block=50, snapshot_timestamp=timestamps[50],
                       gov_events=events, transfers=transfers,
                       token=TokenMetadata(decimals=18, total_supply=1000, symbol='TNY'), timestamps=timestamps,
                       treasury=[TreasuryEntry('USD', Decimal('5000000'), Decimal('1'))],
                       treasury_addresses=[TREASURY])
    record, report = build_dao_record(inputs)
    assert isinstance(record, DaoRecord)
    assert record.total_members == 2
    assert record.active_members == 2
    assert record.circulating_supply == 500
    assert record.largest_holder_share == pytest.approx(0.6)
    assert record.fully_automated and record.fully_automated_detected
    assert record.proposals[0].outcome == Outcome.APPROVED
    assert record.treasury_usd == Decimal('5000000')
    assert report.supply_mismatch is None


def test_voters_without_tokens_count_as_members():
    delegate = '0x' + 'dd' * 20
    transfers = [_transfer(ZERO_ADDRESS, HOLDERS[0], 300, 1, 0), _transfer(ZERO_ADDRESS, HOLDERS[1], 200, 1, 1)]
    events = [_created(1, 10, 11, 20, proposer=HOLDERS[0]), _vote(1, delegate, Support.FOR, 500, 12)]
    timestamps = {b: NOW - 100_000 + b * 12 for b in range(0, 60)}
    inputs = DaoInputs(dao_id='delegated', chain_id=1, snapshot_block=50, snapshot_timestamp=timestamps[50],
                       gov_events=events, transfers=transfers,
                       token=TokenMetadata(decimals=18, total_supply=500, symbol='DLG'), timestamps=timestamps)
    record, _ = build_dao_record(inputs)
    assert record.active_members == 2
    assert record.total_members == 3
    assert count_members({HOLDERS[0]: 1}, frozenset(), [delegate, HOLDERS[0]]) == 2


def test_record_rejects_more_active_than_total_members():
    with pytest.raises(DataIntegrityError):
        DaoRecord(dao_id='d', chain_id=1, snapshot_block=1, snapshot_timestamp=NOW, proposals=[], voters=[],
                  proposers=[], total_members=100, active_members=150, treasury_usd=None, total_supply=0,
                  circulating_supply=0, largest_holder_share=0.0, fully_automated=False, proposer_concentration=None)


def test_classify_activity_reads_record_timeline():
    record = DaoRecord(dao_id='d', chain_id=1, snapshot_block=1, snapshot_timestamp=NOW, proposals=[], voters=[],
                       proposers=[], total_members=0, active_members=0, treasury_usd=None, total_supply=0,
                       circulating_supply=0, largest_holder_share=0.0, fully_automated=False,
                       proposer_concentration=None, activity_timestamps=[NOW - 10 * SECONDS_PER_DAY])
    assert classify_activity(record, NOW) == ActivityTier.MODERATELY_ACTIVE


def test_harmonised_dataset_round_trip(tmp_path):
    raw = tmp_path / 'raw' / 'd.json'
    raw.parent.mkdir()
    raw.write_text('{}')
    record = DaoRecord(dao_id='d', chain_id=1, snapshot_block=9, snapshot_timestamp=NOW, proposals=[], voters=[],
                       proposers=[], total_members=0, active_members=0, treasury_usd=Decimal('12.5'),
                       total_supply=10 ** 30, circulating_supply=10 ** 29, largest_holder_share=0.0,
                       fully_automated=False, proposer_concentration=None, activity_tier=ActivityTier.TEST_OR_DORMANT)
    prov = provenance([raw], tmp_path, 9)
    assert prov['raw_files'] == {'raw/d.json': hashlib.sha256(b'{}').hexdigest()}
    assert {'software_remote', 'software_commit'} <= set(prov)
    path = write_harmonised(tmp_path / 'harmonised', harmonised_document(record, ValidationReport(), [], prov))
    write_manifest(tmp_path / 'harmonised', [read_harmonised(path)])
    assert record_of(read_harmonised(path)) == record


def test_unknown_schema_version_is_rejected(tmp_path):
    path = tmp_path / 'd.json'
    path.write_text(json.dumps({'schema_version': '0.1'}))
    with pytest.raises(StageError):
        read_harmonised(path)


@pytest.mark.parametrize('remote, expected', [
    ('git@github.com:org/dao-kpi.git', 'https://github.com/org/dao-kpi'),
    ('https://github.com/org/dao-kpi.git', 'https://github.com/org/dao-kpi'),
    ('https://example.org/repo', 'https://example.org/repo'),
])
def test_normalize_remote(remote, expected):
    assert normalize_remote(remote) == expected

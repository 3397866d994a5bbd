"""Assemble the harmonised per-DAO record from governance events, transfers and token metadata."""
import logging
from collections import Counter
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Dict, List, Optional, Tuple

from dao_kpi.abi_codec.governance import GovernanceEvent, ProposalExecuted, TokenTransfer, VoteCast
from dao_kpi.chain_access.data_utils import TokenMetadata
from dao_kpi.harmonize.activity import classify_timeline
from dao_kpi.harmonize.balances import (circulating_supply, count_members, excluded_addresses, largest_holder_share,
                                        replay_transfers)
from dao_kpi.harmonize.data_utils import DaoRecord, ProposalSummary, TreasuryEntry, ValidationReport
from dao_kpi.harmonize.proposals import event_time, summarize_proposals
from dao_kpi.harmonize.validate import check_supply


@dataclass
class DaoInputs:
    dao_id: str
    chain_id: int
    snapshot_block: int
    snapshot_timestamp: int
    gov_events: List[GovernanceEvent]
    transfers: List[TokenTransfer]
    token: TokenMetadata
    timestamps: Dict[int, int]
    treasury: Optional[List[TreasuryEntry]] = None # None when no valuation is configured
    treasury_addresses: List[str] = field(default_factory=list)
    locked_addresses: List[str] = field(default_factory=list)
    fully_automated: Optional[bool] = None
    quorum: Optional[int] = None
    quorum_includes_abstain: bool = False


def value_treasury(entries: Optional[List[TreasuryEntry]]) -> Optional[Decimal]:
    if entries is None:
        return None
    return sum((entry.usd_value for entry in entries), Decimal(0))


def proposer_concentration(proposals: List[ProposalSummary]) -> Optional[float]:
    """ Share of proposals submitted by the most frequent proposer. """
    if not proposals:
        return None
    top = Counter(p.proposer for p in proposals).most_common(1)[0][1]
    return top / len(proposals)


def build_dao_record(inputs: DaoInputs, report: Optional[ValidationReport] = None) -> Tuple[DaoRecord, ValidationReport]:
    """
    Cross-link one DAO's data into its DaoRecord.

    Everything is cut at the snapshot block. `fully_automated` falls back to the
    advisory detection (some proposal executed through the governance contract)
    when the configuration leaves it unset.
    """
    report = report if report is not None else ValidationReport()
    gov_events = [e for e in inputs.gov_events if e.block_number <= inputs.snapshot_block]
    now = inputs.snapshot_timestamp

    proposals = summarize_proposals(gov_events, inputs.timestamps, now, quorum=inputs.quorum,
                                    quorum_includes_abstain=inputs.quorum_includes_abstain, report=report)
    known = {p.proposal_id for p in proposals}
    voters = sorted({e.voter for e in gov_events if isinstance(e, VoteCast) and e.proposal_id in known})
    proposers = sorted({p.proposer for p in proposals})
    active = set(voters) | set(proposers)

    sheet = replay_transfers(inputs.transfers, inputs.snapshot_block)
    check_supply(report, inputs.token.total_supply, sheet)
    balances = sheet.nonzero()
    excluded = excluded_addresses(inputs.treasury_addresses, inputs.locked_addresses)
    circulating = circulating_supply(inputs.token.total_supply, balances, inputs.treasury_addresses,
                                     inputs.locked_addresses)
    total_members = count_members(balances, excluded, active)
    delegates = total_members - count_members(balances, excluded)
    if delegates:
        logging.info(f'{inputs.dao_id}: {delegates} active members hold no tokens at the snapshot; '
                     f'counted as members')

    detected = any(isinstance(e, ProposalExecuted) and e.proposal_id in known for e in gov_events)
    fully_automated = inputs.fully_automated if inputs.fully_automated is not None else detected

    activity = sorted(event_time(e, inputs.timestamps) for e in gov_events)
    record = DaoRecord(
        dao_id=inputs.dao_id,
        chain_id=inputs.chain_id,
        snapshot_block=inputs.snapshot_block,
        snapshot_timestamp=now,
        proposals=proposals,
        voters=voters,
        proposers=proposers,
        total_members=total_members,
        active_members=len(active),
        treasury_usd=value_treasury(inputs.treasury),
        total_supply=inputs.token.total_supply,
        circulating_supply=circulating,
        largest_holder_share=largest_holder_share(balances, circulating, excluded),
        fully_automated=fully_automated,
        fully_automated_detected=detected,
        proposer_concentration=proposer_concentration(proposals),
        activity_timestamps=activity,
        activity_tier=classify_timeline(activity, now),
        token_symbol=inputs.token.symbol,
        token_decimals=inputs.token.decimals,
    )
    return record, report

"""Cross-link proposal lifecycle events and votes into per-proposal summaries."""
import logging
from collections import defaultdict
from typing import Dict, List, Optional

from dao_kpi.abi_codec.governance import (GovernanceEvent, ProposalCanceled, ProposalCreated, ProposalExecuted,
                                          ProposalQueued, Support, VoteCast)
from dao_kpi.errors import DataIntegrityError
from dao_kpi.harmonize.data_utils import Outcome, ProposalSummary, ValidationReport


def window_to_utc(value: int, unit: str, timestamps: Dict[int, int]) -> int:
    """ Vote-window bound as UTC seconds; block bounds are looked up in `timestamps`. """
    if unit == 'timestamp':
        return value
    if value not in timestamps:
        raise DataIntegrityError(f'No timestamp for vote-window block {value}')
    return timestamps[value]


def event_time(event: GovernanceEvent, timestamps: Dict[int, int]) -> int:
    if event.timestamp_utc is not None:
        return event.timestamp_utc
    if event.block_number not in timestamps:
        raise DataIntegrityError(f'No timestamp for block {event.block_number}')
    return timestamps[event.block_number]


def decide_outcome(executed: bool, canceled: bool, voting_end: int, now: int, votes_for: int, votes_against: int,
                   votes_abstain: int = 0, quorum: Optional[int] = None, quorum_includes_abstain: bool = False) -> Outcome:
    """
    Executed proposals are approved. Otherwise a canceled proposal is canceled, one whose
    window is still open is pending, and a closed one is approved iff `for` beats `against`
    and the quorum (when configured) is met.
    """
    if executed:
        return Outcome.APPROVED
    if canceled:
        return Outcome.CANCELED
    if voting_end > now:
        return Outcome.PENDING
    if quorum is not None:
        counted = votes_for + (votes_abstain if quorum_includes_abstain else 0)
        if counted < quorum:
            return Outcome.REJECTED
    return Outcome.APPROVED if votes_for > votes_against else Outcome.REJECTED


def summarize_proposals(gov_events: List[GovernanceEvent], timestamps: Dict[int, int], now: int,
                        quorum: Optional[int] = None, quorum_includes_abstain: bool = False,
                        report: Optional[ValidationReport] = None) -> List[ProposalSummary]:
    """
    Build one summary per created proposal.

    Parameters
    ----------
    gov_events: list[GovernanceEvent]
        Mapped governance events of one DAO, up to the snapshot block.
    timestamps: dict[int, int]
        Block number to UTC seconds, covering event blocks and vote-window blocks.
    now: int
        Evaluation time (snapshot timestamp); proposals whose window ends later are pending.
    quorum: int, optional
        Minimum supporting weight, raw token units.
    report: ValidationReport, optional
        Receives orphan votes, executions without creation and other orphan events.

    Returns
    -------
    summaries: list[ProposalSummary]
        In creation order.
    """
    report = report if report is not None else ValidationReport()
    ordered = sorted(gov_events, key=lambda e: (e.block_number, e.log_index))

    created: Dict[int, ProposalCreated] = {}
    for event in ordered:
        if isinstance(event, ProposalCreated):
            if event.proposal_id in created:
                logging.warning(f'Proposal {event.proposal_id} created twice; keeping the first')
                report.orphan_lifecycle_events += 1
                continue
            created[event.proposal_id] = event

    tallies = defaultdict(lambda: {Support.FOR: 0, Support.AGAINST: 0, Support.ABSTAIN: 0})
    vote_counts = defaultdict(int)
    executed, canceled = set(), set()
    for event in ordered:
        if isinstance(event, VoteCast):
            if event.proposal_id not in created:
                report.orphan_votes += 1
                continue
            tallies[event.proposal_id][event.support] += event.weight
            vote_counts[event.proposal_id] += 1
        elif isinstance(event, ProposalExecuted):
            if event.proposal_id not in created:
                logging.warning(f'Proposal {event.proposal_id} executed without a creation event; excluded')
                report.executions_without_creation += 1
                continue
            executed.add(event.proposal_id)
        elif isinstance(event, (ProposalCanceled, ProposalQueued)):
            if event.proposal_id not in created:
                report.orphan_lifecycle_events += 1
                continue
            if isinstance(event, ProposalCanceled):
                canceled.add(event.proposal_id)

    summaries = []
    for proposal_id, creation in created.items():
        voting_start = window_to_utc(creation.vote_start, creation.window_unit, timestamps)
        voting_end = window_to_utc(creation.vote_end, creation.window_unit, timestamps)
        tally = tallies[proposal_id]
        outcome = decide_outcome(proposal_id in executed, proposal_id in canceled, voting_end, now,
                                 tally[Support.FOR], tally[Support.AGAINST], tally[Support.ABSTAIN],
                                 quorum, quorum_includes_abstain)
        summaries.append(ProposalSummary(
            proposal_id=proposal_id,
            proposer=creation.proposer,
            created_at=event_time(creation, timestamps),
            voting_start=voting_start,
            voting_end=voting_end,
            outcome=outcome,
            executed=proposal_id in executed,
            votes_for=tally[Support.FOR],
            votes_against=tally[Support.AGAINST],
            votes_abstain=tally[Support.ABSTAIN],
            vote_count=vote_counts[proposal_id],
        ))
    return summaries

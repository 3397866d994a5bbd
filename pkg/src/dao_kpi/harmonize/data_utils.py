import enum
from dataclasses import asdict, dataclass, field
from decimal import Decimal
from typing import Any, Dict, List, Optional

from dao_kpi.chain_access.data_utils import ZERO_ADDRESS
from dao_kpi.errors import DataIntegrityError


SECONDS_PER_DAY = 86_400
DEAD_ADDRESS = '0x000000000000000000000000000000000000dead'
BURN_ADDRESSES = frozenset({ZERO_ADDRESS, DEAD_ADDRESS})


class Outcome(str, enum.Enum):
    APPROVED = 'approved'
    REJECTED = 'rejected'
    CANCELED = 'canceled'
    PENDING = 'pending'


class ActivityTier(str, enum.Enum):
    HIGHLY_ACTIVE = 'HighlyActive'
    MODERATELY_ACTIVE = 'ModeratelyActive'
    MINIMALLY_ACTIVE = 'MinimallyActive'
    TEST_OR_DORMANT = 'TestOrDormant'


@dataclass(frozen=True)
class ProposalSummary:
    proposal_id: int
    proposer: str
    created_at: int
    voting_start: int
    voting_end: int
    outcome: Outcome
    executed: bool
    votes_for: int = 0
    votes_against: int = 0
    votes_abstain: int = 0
    vote_count: int = 0

    def __post_init__(self):
        if self.voting_start > self.voting_end:
            raise ValueError(f'Proposal {self.proposal_id}: voting_start after voting_end')
        if self.executed and self.outcome != Outcome.APPROVED:
            raise ValueError(f'Proposal {self.proposal_id}: executed but outcome {self.outcome.value}')

    @property
    def duration_seconds(self) -> int:
        return self.voting_end - self.voting_start

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['outcome'] = self.outcome.value
        for key in ('proposal_id', 'votes_for', 'votes_against', 'votes_abstain'):
            data[key] = str(data[key])
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ProposalSummary':
        data = dict(data)
        data['outcome'] = Outcome(data['outcome'])
        for key in ('proposal_id', 'votes_for', 'votes_against', 'votes_abstain'):
            data[key] = int(data[key])
        return cls(**data)


@dataclass
class ValidationReport:
    """ Anomalies found while harmonising one DAO; all are counted, none abort the build. """
    events_in: int = 0
    duplicates: int = 0
    non_monotone_timestamps: int = 0
    missing_timestamps: int = 0
    orphan_votes: int = 0
    executions_without_creation: int = 0
    orphan_lifecycle_events: int = 0
    invalid_governance_events: int = 0
    supply_mismatch: Optional[str] = None # totalSupply() minus (minted - burned), when nonzero

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ValidationReport':
        return cls(**data)


@dataclass(frozen=True)
class TreasuryEntry:
    asset: str
    amount: Decimal
    usd_price: Decimal

    @property
    def usd_value(self) -> Decimal:
        return self.amount * self.usd_price


@dataclass
class DaoRecord:
    dao_id: str
    chain_id: int
    snapshot_block: int
    snapshot_timestamp: int
    proposals: List[ProposalSummary]
    voters: List[str]
    proposers: List[str]
    total_members: int
    active_members: int
    treasury_usd: Optional[Decimal]
    total_supply: int
    circulating_supply: int
    largest_holder_share: float
    fully_automated: bool
    proposer_concentration: Optional[float]
    activity_timestamps: List[int] = field(default_factory=list)
    activity_tier: Optional[ActivityTier] = None
    fully_automated_detected: Optional[bool] = None
    token_symbol: str = ''
    token_decimals: int = 18

    def __post_init__(self):
        if self.circulating_supply > self.total_supply:
            raise ValueError(f'{self.dao_id}: circulating supply exceeds total supply')
        if not 0 <= self.largest_holder_share <= 1:
            raise ValueError(f'{self.dao_id}: largest_holder_share {self.largest_holder_share} outside [0, 1]')
        if not 0 <= self.active_members <= self.total_members:
            raise DataIntegrityError(f'{self.dao_id}: {self.active_members} active members '
                                     f'outside [0, {self.total_members}]')

    def to_dict(self) -> Dict[str, Any]:
        return {
            'dao_id': self.dao_id,
            'chain_id': self.chain_id,
            'snapshot_block': self.snapshot_block,
            'snapshot_timestamp': self.snapshot_timestamp,
            'proposals': [p.to_dict() for p in self.proposals],
            'voters': list(self.voters),
            'proposers': list(self.proposers),
            'total_members': self.total_members,
            'active_members': self.active_members,
            'treasury_usd': None if self.treasury_usd is None else str(self.treasury_usd),
            'total_supply': str(self.total_supply),
            'circulating_supply': str(self.circulating_supply),
            'largest_holder_share': self.largest_holder_share,
            'fully_automated': self.fully_automated,
            'fully_automated_detected': self.fully_automated_detected,
            'proposer_concentration': self.proposer_concentration,
            'activity_timestamps': list(self.activity_timestamps),
            'activity_tier': None if self.activity_tier is None else self.activity_tier.value,
            'token_symbol': self.token_symbol,
            'token_decimals': self.token_decimals,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'DaoRecord':
        return cls(
            dao_id=data['dao_id'],
            chain_id=data['chain_id'],
            snapshot_block=data['snapshot_block'],
            snapshot_timestamp=data['snapshot_timestamp'],
            proposals=[ProposalSummary.from_dict(p) for p in data['proposals']],
            voters=list(data['voters']),
            proposers=list(data['proposers']),
            total_members=data['total_members'],
            active_members=data['active_members'],
            treasury_usd=None if data['treasury_usd'] is None else Decimal(data['treasury_usd']),
            total_supply=int(data['total_supply']),
            circulating_supply=int(data['circulating_supply']),
            largest_holder_share=data['largest_holder_share'],
            fully_automated=data['fully_automated'],
            fully_automated_detected=data.get('fully_automated_detected'),
            proposer_concentration=data['proposer_concentration'],
            activity_timestamps=list(data.get('activity_timestamps', [])),
            activity_tier=None if data.get('activity_tier') is None else ActivityTier(data['activity_tier']),
            token_symbol=data.get('token_symbol', ''),
            token_decimals=data.get('token_decimals', 18),
        )

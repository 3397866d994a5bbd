import math
from dataclasses import asdict, dataclass, field
from decimal import Decimal
from typing import Any, Dict, List, Optional, Tuple

from dao_kpi.chain_access.data_utils import RawLog
from dao_kpi.errors import SpecError


HOLDER_DISTRIBUTIONS = ('uniform', 'pareto', 'single_whale')
FRAMEWORKS = ('governor_alpha', 'governor_bravo', 'oz_governor')
SYNTH_CHAIN_ID = 31337
GENESIS_TIMESTAMP = 1_650_000_000


def round_half_up(value: float) -> int:
    return math.floor(value + 0.5)


@dataclass(frozen=True)
class SynthSpec:
    """
    One synthetic DAO.

    `holder_param` is the Pareto shape for 'pareto' and the whale's share of the
    circulating supply for 'single_whale'.
    """
    seed: int
    member_count: int = 100
    participation_target: float = 0.25
    proposal_count: int = 10
    approval_target: float = 0.6
    duration_days_range: Tuple[float, float] = (3.0, 7.0)
    holder_distribution: str = 'uniform'
    holder_param: Optional[float] = None
    automated: bool = True
    treasury_usd: Decimal = Decimal('250000000')
    treasury_token_share: float = 0.2
    transfer_count: int = 20
    block_time_seconds: int = 12
    framework: str = 'governor_bravo'
    chain_id: int = SYNTH_CHAIN_ID
    dao_id: str = ''

    def __post_init__(self):
        if not self.dao_id:
            object.__setattr__(self, 'dao_id', f'synth-{self.seed}')
        object.__setattr__(self, 'treasury_usd', Decimal(str(self.treasury_usd)))
        object.__setattr__(self, 'duration_days_range', tuple(float(d) for d in self.duration_days_range))
        self.validate()

    @property
    def active_target(self) -> int:
        return round_half_up(self.participation_target * self.member_count)

    @property
    def approved_target(self) -> int:
        return round_half_up(self.approval_target * self.proposal_count)

    def validate(self) -> None:
        if not 0 <= self.seed < 2 ** 64:
            raise SpecError(f'seed must be a 64-bit unsigned integer, got {self.seed}')
        for name in ('participation_target', 'approval_target', 'treasury_token_share'):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise SpecError(f'{name} must lie in [0, 1], got {getattr(self, name)}')
        if self.treasury_token_share == 1.0 and self.member_count > 0:
            raise SpecError('treasury_token_share 1 leaves nothing for members')
        if self.member_count < 0 or self.proposal_count < 0 or self.transfer_count < 0:
            raise SpecError('member_count, proposal_count and transfer_count must be non-negative')
        low, high = self.duration_days_range
        if not 0 < low <= high:
            raise SpecError(f'duration_days_range must satisfy 0 < min <= max, got {self.duration_days_range}')
        if self.block_time_seconds < 1:
            raise SpecError(f'block_time_seconds must be >= 1, got {self.block_time_seconds}')
        if self.treasury_usd < 0:
            raise SpecError(f'treasury_usd must be non-negative, got {self.treasury_usd}')
        if self.framework not in FRAMEWORKS:
            raise SpecError(f'Unknown framework "{self.framework}", expected one of {FRAMEWORKS}')

        if self.holder_distribution not in HOLDER_DISTRIBUTIONS:
            raise SpecError(f'Unknown holder distribution "{self.holder_distribution}"')
        if self.holder_distribution == 'pareto' and not (self.holder_param or 0) > 0:
            raise SpecError('pareto holder distribution needs a positive shape in holder_param')
        if self.holder_distribution == 'single_whale':
            share = self.holder_param
            if share is None or not 0 < share <= 1:
                raise SpecError('single_whale holder distribution needs a share in (0, 1] in holder_param')
            if share == 1 and self.member_count > 1:
                raise SpecError('a whale holding everything leaves the other members without tokens')

        if self.participation_target > 0 and self.member_count == 0:
            raise SpecError('participation_target > 0 needs at least one member')
        if self.proposal_count > 0 and self.active_target == 0:
            raise SpecError('proposals need at least one active member to submit them')
        if self.proposal_count == 0 and self.active_target > 0:
            raise SpecError('active members need at least one proposal to vote on')

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['treasury_usd'] = str(self.treasury_usd)
        data['duration_days_range'] = list(self.duration_days_range)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SynthSpec':
        try:
            return cls(**data)
        except TypeError as e:
            raise SpecError(f'Invalid synth spec: {e}')


@dataclass
class GroundTruth:
    """ What the generator emitted, counted on its own side. """
    dao_id: str
    total_members: int
    active_members: int
    participation_rate: Optional[float]
    total_proposals: int
    approved: int
    approval_rate: Optional[float]
    total_duration_seconds: int
    avg_duration_days: Optional[float]
    total_supply: int
    circulating_supply: int
    circulating_pct: float
    largest_holder_share: float
    treasury_usd: Decimal
    fully_automated: bool
    voters: List[str]
    levels: Dict[str, str] = field(default_factory=dict)
    scores: Dict[str, Optional[str]] = field(default_factory=dict)
    composite: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['total_supply'] = str(self.total_supply)
        data['circulating_supply'] = str(self.circulating_supply)
        data['treasury_usd'] = str(self.treasury_usd)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'GroundTruth':
        data = dict(data)
        data['total_supply'] = int(data['total_supply'])
        data['circulating_supply'] = int(data['circulating_supply'])
        data['treasury_usd'] = Decimal(data['treasury_usd'])
        return cls(**data)


@dataclass
class SynthFixtures:
    """ Encoded chain state of one synthetic DAO. """
    dao_id: str
    chain_id: int
    framework: str
    governance_address: str
    token_address: str
    treasury_address: str
    logs: List[RawLog]
    supply_changes: List[Tuple[int, int]] # (block, +minted / -burned)
    last_block: int
    block_time_seconds: int
    genesis_timestamp: int = GENESIS_TIMESTAMP
    token_symbol: str = 'SYN'
    token_decimals: int = 18

    def timestamp(self, block: int) -> int:
        return self.genesis_timestamp + block * self.block_time_seconds

    def to_dict(self) -> Dict[str, Any]:
        return {
            'dao_id': self.dao_id,
            'chain_id': self.chain_id,
            'framework': self.framework,
            'governance_address': self.governance_address,
            'token_address': self.token_address,
            'treasury_address': self.treasury_address,
            'logs': [log.to_dict() for log in self.logs],
            'supply_changes': [[block, str(delta)] for block, delta in self.supply_changes],
            'last_block': self.last_block,
            'block_time_seconds': self.block_time_seconds,
            'genesis_timestamp': self.genesis_timestamp,
            'token_symbol': self.token_symbol,
            'token_decimals': self.token_decimals,
        }
